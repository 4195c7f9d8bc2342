//! Synthetic cross-camera tracking. Targets wander a grid of cameras along
//! drifting corridors; a correlation model prunes which cameras and time
//! offsets a recursive query searches.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::io::Read;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, FleetError, Result};
use crate::goals::{metric, EvalReport, Goals};
use crate::seeds::{rng_for, sub_seed};
use crate::shaping::{minimize, BoSettings, CandidatePool, EpochRecord};

/// Cameras pinned row-major on the smallest near-square grid holding them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CameraGrid {
    pub rows: usize,
    pub cols: usize,
    pub n_cameras: usize,
}

impl CameraGrid {
    pub fn new(n_cameras: usize) -> Result<Self> {
        if n_cameras == 0 {
            return Err(contract("camera grid needs at least one camera"));
        }
        let cols = (n_cameras as f64).sqrt().ceil() as usize;
        Ok(Self { rows: n_cameras.div_ceil(cols), cols, n_cameras })
    }

    pub fn position(&self, camera: usize) -> (usize, usize) {
        (camera / self.cols, camera % self.cols)
    }

    pub fn camera_at(&self, row: usize, col: usize) -> Option<usize> {
        let id = row * self.cols + col;
        (row < self.rows && col < self.cols && id < self.n_cameras).then_some(id)
    }

    /// Neighbouring cameras with the compass heading of the hop (east 0,
    /// north pi/2).
    fn neighbours(&self, camera: usize) -> Vec<(usize, f64)> {
        let (r, c) = self.position(camera);
        let mut out = Vec::with_capacity(4);
        if let Some(n) = self.camera_at(r, c + 1) {
            out.push((n, 0.0));
        }
        if r > 0 {
            if let Some(n) = self.camera_at(r - 1, c) {
                out.push((n, PI / 2.0));
            }
        }
        if c > 0 {
            if let Some(n) = self.camera_at(r, c - 1) {
                out.push((n, PI));
            }
        }
        if let Some(n) = self.camera_at(r + 1, c) {
            out.push((n, 1.5 * PI));
        }
        out
    }
}

/// A target seen by a camera during one minute of a day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Visit {
    pub target: usize,
    pub camera: usize,
    pub minute: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDataset {
    pub grid: CameraGrid,
    pub n_targets: usize,
    /// Corridor rotation per day, in radians.
    pub drift: f64,
    /// Visits per day, sorted by target then minute.
    pub days: Vec<Vec<Visit>>,
}

impl TrajectoryDataset {
    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn day(&self, d: usize) -> &[Visit] {
        &self.days[d]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkParams {
    pub hops_per_day: usize,
    /// How strongly a hop prefers the target's corridor heading.
    pub concentration: f64,
    /// Half-width of the spread of target headings around the main flow.
    pub corridor_spread: f64,
    /// Targets enter during the first `start_window` minutes.
    pub start_window: u32,
    /// Minutes between sightings are drawn from `1..=max_gap`.
    pub max_gap: u32,
}

impl Default for WalkParams {
    fn default() -> Self {
        Self { hops_per_day: 30, concentration: 2.0, corridor_spread: PI / 8.0, start_window: 60, max_gap: 3 }
    }
}

pub fn gen_trajectories(n_cameras: usize, n_targets: usize, days: usize, drift: f64, seed: u64) -> Result<TrajectoryDataset> {
    gen_trajectories_with(n_cameras, n_targets, days, drift, &WalkParams::default(), seed)
}

/// Biased random walks: every target keeps a corridor heading near the main
/// flow, and all headings rotate by `drift` radians each day.
pub fn gen_trajectories_with(
    n_cameras: usize,
    n_targets: usize,
    days: usize,
    drift: f64,
    walk: &WalkParams,
    seed: u64,
) -> Result<TrajectoryDataset> {
    if n_targets == 0 || days == 0 {
        return Err(contract("trajectories need at least one target and one day"));
    }
    if !(0.0..=1.0).contains(&drift) {
        return Err(contract(format!("drift {drift} outside [0, 1]")));
    }
    if walk.max_gap == 0 || walk.start_window == 0 {
        return Err(contract("walk gaps and start window must be positive"));
    }
    let grid = CameraGrid::new(n_cameras)?;
    let mut rng = rng_for(seed, 0xc0);
    let flow = rng.gen::<f64>() * 2.0 * PI;
    let headings: Vec<f64> =
        (0..n_targets).map(|_| flow + rng.gen_range(-1.0..=1.0) * walk.corridor_spread).collect();
    let mut out = Vec::with_capacity(days);
    for d in 0..days {
        let rotation = drift * d as f64;
        let mut visits = Vec::with_capacity(n_targets * (walk.hops_per_day + 1));
        for (target, &heading) in headings.iter().enumerate() {
            let mut rng = rng_for(sub_seed(seed, d as u64), target as u64);
            let theta = heading + rotation;
            let mut camera = rng.gen_range(0..n_cameras);
            let mut minute = rng.gen_range(0..walk.start_window);
            visits.push(Visit { target, camera, minute });
            for _ in 0..walk.hops_per_day {
                let options = grid.neighbours(camera);
                if !options.is_empty() {
                    let weights: Vec<f64> =
                        options.iter().map(|&(_, phi)| (walk.concentration * (phi - theta).cos()).exp()).collect();
                    let mut pick = rng.gen::<f64>() * weights.iter().sum::<f64>();
                    camera = options[options.len() - 1].0;
                    for (&(n, _), w) in options.iter().zip(&weights) {
                        if pick < *w {
                            camera = n;
                            break;
                        }
                        pick -= w;
                    }
                }
                minute += rng.gen_range(1..=walk.max_gap);
                visits.push(Visit { target, camera, minute });
            }
        }
        out.push(visits);
    }
    Ok(TrajectoryDataset { grid, n_targets, drift, days: out })
}

#[derive(Debug, Deserialize)]
struct PortoRow {
    target_id: String,
    timestamp: i64,
    lon: f64,
    lat: f64,
}

/// Reads `target_id,timestamp,lon,lat` rows (unix seconds), snapping
/// positions onto the camera grid spanning the data's bounding box. Days
/// start at UTC midnight; repeated sightings within a minute are dropped.
pub fn read_porto_csv<R: Read>(input: R, n_cameras: usize) -> Result<TrajectoryDataset> {
    let grid = CameraGrid::new(n_cameras)?;
    let mut rows = Vec::new();
    for (line, rec) in csv::Reader::from_reader(input).deserialize::<PortoRow>().enumerate() {
        let row = rec.map_err(|e| FleetError::Parse(format!("trajectory row {}: {e}", line + 1)))?;
        if !row.lon.is_finite() || !row.lat.is_finite() {
            return Err(FleetError::NonFinite(format!("position of trajectory row {}", line + 1)));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(FleetError::Parse("trajectory file has no rows".into()));
    }
    let ids: BTreeMap<&str, usize> = {
        let names: BTreeSet<&str> = rows.iter().map(|r| r.target_id.as_str()).collect();
        names.into_iter().enumerate().map(|(i, n)| (n, i)).collect()
    };
    let (lon_lo, lon_hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.lon), b.max(r.lon)));
    let (lat_lo, lat_hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.lat), b.max(r.lat)));
    let snap = |x: f64, lo: f64, hi: f64, n: usize| {
        if hi > lo {
            (((x - lo) / (hi - lo)) * n as f64).floor().clamp(0.0, n as f64 - 1.0) as usize
        } else {
            0
        }
    };
    let day0 = rows.iter().map(|r| r.timestamp).min().expect("rows checked non-empty").div_euclid(86_400);
    let mut by_day: BTreeMap<usize, Vec<Visit>> = BTreeMap::new();
    for r in &rows {
        let col = snap(r.lon, lon_lo, lon_hi, grid.cols);
        let row = grid.rows - 1 - snap(r.lat, lat_lo, lat_hi, grid.rows);
        let camera = (row * grid.cols + col).min(n_cameras - 1);
        let day = (r.timestamp.div_euclid(86_400) - day0) as usize;
        let minute = (r.timestamp.rem_euclid(86_400) / 60) as u32;
        by_day.entry(day).or_default().push(Visit { target: ids[r.target_id.as_str()], camera, minute });
    }
    let n_days = by_day.keys().next_back().map_or(0, |d| d + 1);
    let mut days = vec![Vec::new(); n_days];
    for (d, mut visits) in by_day {
        visits.sort_by_key(|v| (v.target, v.minute));
        visits.dedup_by(|b, a| a.target == b.target && a.minute == b.minute);
        days[d] = visits;
    }
    Ok(TrajectoryDataset { grid, n_targets: ids.len(), drift: 0.0, days })
}

/// Where each target was seen during one day.
#[derive(Debug, Clone)]
pub struct DayIndex {
    n_cameras: usize,
    by_target: BTreeMap<usize, Vec<(usize, u32)>>,
}

impl DayIndex {
    pub fn new(visits: &[Visit], n_cameras: usize) -> Result<Self> {
        let mut by_target: BTreeMap<usize, Vec<(usize, u32)>> = BTreeMap::new();
        for v in visits {
            if v.camera >= n_cameras {
                return Err(FleetError::UnknownCamera(v.camera));
            }
            by_target.entry(v.target).or_default().push((v.camera, v.minute));
        }
        for frames in by_target.values_mut() {
            frames.sort_by_key(|&(c, m)| (m, c));
        }
        Ok(Self { n_cameras, by_target })
    }

    pub fn n_cameras(&self) -> usize {
        self.n_cameras
    }

    pub fn frames_of(&self, target: usize) -> &[(usize, u32)] {
        self.by_target.get(&target).map_or(&[], |v| v.as_slice())
    }

    /// One query per target, from its first sighting of the day.
    pub fn queries(&self) -> Vec<Sighting> {
        self.by_target
            .iter()
            .filter_map(|(&target, f)| f.first().map(|&(camera, minute)| Sighting { target, camera, minute }))
            .collect()
    }
}

/// Spatial and temporal correlations between cameras plus the pruning
/// thresholds applied to them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    pub n_cameras: usize,
    /// Longest offset, in minutes, correlated and searched per hop.
    pub window: u32,
    spatial: Vec<f64>,
    temporal: Vec<f64>,
    pub spatial_threshold: f64,
    pub temporal_threshold: f64,
}

impl CorrelationModel {
    pub fn spatial(&self, i: usize, j: usize) -> f64 {
        self.spatial[i * self.n_cameras + j]
    }

    /// Share of the `i -> j` sightings separated by `offset` minutes.
    pub fn temporal(&self, i: usize, j: usize, offset: u32) -> f64 {
        debug_assert!((1..=self.window).contains(&offset));
        self.temporal[(i * self.n_cameras + j) * self.window as usize + (offset - 1) as usize]
    }

    pub fn with_thresholds(mut self, spatial: f64, temporal: f64) -> Self {
        self.spatial_threshold = spatial;
        self.temporal_threshold = temporal;
        self
    }
}

/// Counts, over windows of `window` minutes sliding by half a window, how
/// often a target seen at `i` is seen later at `j` in the same window,
/// relative to windows in which it is seen at `i`. Offsets up to `window`
/// minutes feed a per-pair histogram.
pub fn build_correlations(day: &[Visit], n_cameras: usize, window: u32) -> Result<CorrelationModel> {
    if day.is_empty() {
        return Err(contract("correlations need at least one visit"));
    }
    if window < 2 {
        return Err(contract("correlation window must span at least two minutes"));
    }
    let index = DayIndex::new(day, n_cameras)?;
    let n = n_cameras;
    let w = window as usize;
    let step = window / 2;
    let mut occurrences = vec![0u64; n];
    let mut pairs = vec![0u64; n * n];
    let mut offsets = vec![0u64; n * n * w];
    let mut first = vec![u32::MAX; n];
    let mut last = vec![0u32; n];
    for frames in index.by_target.values() {
        let (lo, hi) = (frames[0].1, frames[frames.len() - 1].1);
        let mut start = (lo.saturating_sub(window - 1) / step) * step;
        while start <= hi {
            let end = start + window;
            let inside: Vec<(usize, u32)> = frames.iter().copied().filter(|&(_, m)| m >= start && m < end).collect();
            if !inside.is_empty() {
                let cams: BTreeSet<usize> = inside.iter().map(|&(c, _)| c).collect();
                for &(c, m) in &inside {
                    first[c] = first[c].min(m);
                    last[c] = last[c].max(m);
                }
                for &i in &cams {
                    occurrences[i] += 1;
                    for &j in &cams {
                        if i != j && first[i] < last[j] {
                            pairs[i * n + j] += 1;
                        }
                    }
                }
                for &c in &cams {
                    first[c] = u32::MAX;
                    last[c] = 0;
                }
            }
            start += step;
        }
        for (a, &(ci, ti)) in frames.iter().enumerate() {
            for &(cj, tj) in &frames[a + 1..] {
                let off = tj - ti;
                if off > window {
                    break;
                }
                if off > 0 && ci != cj {
                    offsets[(ci * n + cj) * w + off as usize - 1] += 1;
                }
            }
        }
    }
    let mut spatial = vec![0.0; n * n];
    let mut temporal = vec![0.0; n * n * w];
    for i in 0..n {
        for j in 0..n {
            spatial[i * n + j] = if i == j {
                1.0
            } else if occurrences[i] > 0 {
                (pairs[i * n + j] as f64 / occurrences[i] as f64).min(1.0)
            } else {
                0.0
            };
            let hist = &offsets[(i * n + j) * w..(i * n + j + 1) * w];
            let total: u64 = hist.iter().sum();
            if total > 0 {
                for (k, &h) in hist.iter().enumerate() {
                    temporal[(i * n + j) * w + k] = h as f64 / total as f64;
                }
            }
        }
    }
    Ok(CorrelationModel { n_cameras, window, spatial, temporal, spatial_threshold: 0.0, temporal_threshold: 0.0 })
}

/// A target seen at `camera` during `minute`; the query looks for its later frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sighting {
    pub target: usize,
    pub camera: usize,
    pub minute: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResult {
    /// Frames `(camera, minute)` in which the target was found, in order.
    pub returned: Vec<(usize, u32)>,
    pub frames_searched: usize,
    /// Frames an unpruned search examines for the same query.
    pub exhaustive_frames: usize,
    /// Share of searched frames that held the target.
    pub precision: f64,
    /// Share of the target's later frames that were found.
    pub recall: f64,
}

/// For every anchor camera, the `(camera, offset)` frames its search
/// examines: its own next `window` minutes, plus those of each camera `j`
/// with `C_s[i][j]` at or above `spatial` at offsets whose share reaches
/// `temporal`.
fn plan(model: &CorrelationModel, spatial: f64, temporal: f64) -> Vec<Vec<(usize, u32)>> {
    let w = model.window;
    (0..model.n_cameras)
        .map(|i| {
            let mut out: Vec<(usize, u32)> = (1..=w).map(|o| (i, o)).collect();
            for j in (0..model.n_cameras).filter(|&j| j != i && model.spatial(i, j) >= spatial) {
                out.extend((1..=w).filter(|&o| model.temporal(i, j, o) >= temporal).map(|o| (j, o)));
            }
            out
        })
        .collect()
}

/// Per-frame marks reused across queries; a mark is live when it equals
/// the current query's stamp.
#[derive(Default)]
struct Scratch {
    stamp: u32,
    examined: Vec<u32>,
    present: Vec<u32>,
}

/// Searches outward from the sighting and from every match. Each frame is
/// examined at most once, so the search ends once no new match appears.
fn search(
    q: Sighting,
    plan: &[Vec<(usize, u32)>],
    window: u32,
    index: &DayIndex,
    scratch: &mut Scratch,
) -> (Vec<(usize, u32)>, usize) {
    let n = plan.len();
    // Nothing is found past the target's last frame, so no anchor lies beyond it.
    let last = index.frames_of(q.target).last().map_or(q.minute, |&(_, m)| m.max(q.minute));
    let span = (last - q.minute + window + 1) as usize;
    let slot = |c: usize, m: u32| c * span + (m - q.minute) as usize;
    if scratch.examined.len() < n * span {
        scratch.examined.resize(n * span, 0);
        scratch.present.resize(n * span, 0);
    }
    scratch.stamp = scratch.stamp.wrapping_add(1);
    if scratch.stamp == 0 {
        scratch.examined.fill(0);
        scratch.present.fill(0);
        scratch.stamp = 1;
    }
    let stamp = scratch.stamp;
    for &(c, m) in index.frames_of(q.target).iter().filter(|&&(_, m)| m > q.minute) {
        scratch.present[slot(c, m)] = stamp;
    }
    let mut searched = 0;
    let mut found = Vec::new();
    let mut pending = vec![(q.camera, q.minute)];
    while let Some((a, t)) = pending.pop() {
        for &(j, o) in &plan[a] {
            let s = slot(j, t + o);
            if scratch.examined[s] == stamp {
                continue;
            }
            scratch.examined[s] = stamp;
            searched += 1;
            if scratch.present[s] == stamp {
                found.push((j, t + o));
                pending.push((j, t + o));
            }
        }
    }
    found.sort_by_key(|&(c, m)| (m, c));
    (found, searched)
}

fn summarize(q: Sighting, index: &DayIndex, returned: Vec<(usize, u32)>, searched: usize, exhaustive: usize) -> QueryResult {
    let relevant = index.frames_of(q.target).iter().filter(|&&(_, m)| m > q.minute).count();
    QueryResult {
        precision: if searched == 0 { 0.0 } else { returned.len() as f64 / searched as f64 },
        recall: if relevant == 0 { 1.0 } else { returned.len() as f64 / relevant as f64 },
        returned,
        frames_searched: searched,
        exhaustive_frames: exhaustive,
    }
}

pub fn track_query(q: Sighting, model: &CorrelationModel, index: &DayIndex) -> Result<QueryResult> {
    if q.camera >= model.n_cameras || model.n_cameras != index.n_cameras {
        return Err(FleetError::UnknownCamera(q.camera));
    }
    let mut scratch = Scratch::default();
    let pruned = plan(model, model.spatial_threshold, model.temporal_threshold);
    let (returned, searched) = search(q, &pruned, model.window, index, &mut scratch);
    let (_, exhaustive) = search(q, &plan(model, 0.0, 0.0), model.window, index, &mut scratch);
    Ok(summarize(q, index, returned, searched, exhaustive))
}

/// Mean recall as accuracy, mean frames searched, mean precision and the
/// throughput proxy (exhaustive frames over searched frames).
pub fn camera_eval(results: &[QueryResult], goals: &Goals) -> Result<EvalReport> {
    if results.is_empty() {
        return Err(contract("camera evaluation needs at least one query"));
    }
    let k = results.len() as f64;
    let searched: usize = results.iter().map(|r| r.frames_searched).sum();
    let exhaustive: usize = results.iter().map(|r| r.exhaustive_frames).sum();
    let mut report = EvalReport::default()
        .with(metric::ACCURACY, results.iter().map(|r| r.recall).sum::<f64>() / k)
        .with(metric::PRECISION, results.iter().map(|r| r.precision).sum::<f64>() / k)
        .with(metric::FRAMES_SEARCHED, searched as f64 / k)
        .with(metric::THROUGHPUT, if searched == 0 { 0.0 } else { exhaustive as f64 / searched as f64 });
    report.finished = goals.all_met(&report)?;
    Ok(report)
}

/// One day's queries with their unpruned search cost computed once.
#[derive(Debug, Clone)]
pub struct DayQueries {
    pub index: DayIndex,
    pub queries: Vec<Sighting>,
    exhaustive: Vec<usize>,
}

impl DayQueries {
    pub fn new(visits: &[Visit], n_cameras: usize, window: u32) -> Result<Self> {
        let index = DayIndex::new(visits, n_cameras)?;
        let queries = index.queries();
        if queries.is_empty() {
            return Err(contract("day has no sightings to query"));
        }
        let open = CorrelationModel {
            n_cameras,
            window,
            spatial: vec![0.0; n_cameras * n_cameras],
            temporal: vec![0.0; n_cameras * n_cameras * window as usize],
            spatial_threshold: 0.0,
            temporal_threshold: 0.0,
        };
        let all = plan(&open, 0.0, 0.0);
        let mut scratch = Scratch::default();
        let exhaustive = queries.iter().map(|&q| search(q, &all, window, &index, &mut scratch).1).collect();
        Ok(Self { index, queries, exhaustive })
    }

    pub fn evaluate(&self, model: &CorrelationModel, goals: &Goals) -> Result<EvalReport> {
        let plan = plan(model, model.spatial_threshold, model.temporal_threshold);
        let mut scratch = Scratch::default();
        let results: Vec<QueryResult> = self
            .queries
            .iter()
            .zip(&self.exhaustive)
            .map(|(&q, &ex)| {
                let (returned, searched) = search(q, &plan, model.window, &self.index, &mut scratch);
                summarize(q, &self.index, returned, searched, ex)
            })
            .collect();
        camera_eval(&results, goals)
    }
}

/// Goal hinge plus `frame_cost` times the searched share of the exhaustive frames.
pub fn tracking_loss(goals: &Goals, report: &EvalReport, frame_cost: f64) -> Result<f64> {
    let mut total = 0.0;
    for g in goals.iter() {
        total += g.hinge(report.metric(&g.metric)?);
    }
    let throughput = report.metric(metric::THROUGHPUT)?;
    Ok(total + if throughput > 0.0 { frame_cost / throughput } else { frame_cost })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTuning {
    pub spatial: f64,
    pub temporal: f64,
    pub best_loss: f64,
    pub goals_met: bool,
    pub history: Vec<EpochRecord<f64>>,
}

impl ThresholdTuning {
    pub fn apply(&self, model: CorrelationModel) -> CorrelationModel {
        model.with_thresholds(self.spatial, self.temporal)
    }
}

/// Bayesian search over both thresholds, each the square of a unit-cube
/// coordinate so small thresholds get most of the resolution. Starts from
/// the unpruned search so a goal-meeting setting is always on record.
pub fn tune_thresholds(
    model: &CorrelationModel,
    day: &DayQueries,
    goals: &Goals,
    frame_cost: f64,
    settings: &BoSettings<f64>,
    seed: u64,
) -> Result<ThresholdTuning> {
    let mut rng = rng_for(seed, 0x7a);
    let run = minimize(settings, vec![0.0, 0.0], &CandidatePool::Random, &mut rng, |r| vec![r.gen(), r.gen()], |u| {
        let report = day.evaluate(&model.clone().with_thresholds(u[0] * u[0], u[1] * u[1]), goals)?;
        Ok((tracking_loss(goals, &report, frame_cost)?, goals.all_met(&report)?))
    })?;
    let best = run.best_trial();
    Ok(ThresholdTuning {
        spatial: best.point[0] * best.point[0],
        temporal: best.point[1] * best.point[1],
        best_loss: best.loss,
        goals_met: best.goals_met,
        history: run
            .trials
            .iter()
            .enumerate()
            .map(|(epoch, t)| EpochRecord { epoch, loss: t.loss, goals_met: t.goals_met })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingSettings {
    pub window: u32,
    pub frame_cost: f64,
    pub tuning_epochs: usize,
}

impl Default for TrackingSettings {
    fn default() -> Self {
        Self { window: 10, frame_cost: 1.0, tuning_epochs: 30 }
    }
}

/// Builds correlations from one day and tunes thresholds on it.
pub fn train_day(ds: &TrajectoryDataset, day: usize, goals: &Goals, settings: &TrackingSettings, seed: u64) -> Result<CorrelationModel> {
    let n = ds.grid.n_cameras;
    let model = build_correlations(ds.day(day), n, settings.window)?;
    let queries = DayQueries::new(ds.day(day), n, settings.window)?;
    let bo = BoSettings::default().with_epochs(settings.tuning_epochs);
    let tuned = tune_thresholds(&model, &queries, goals, settings.frame_cost, &bo, sub_seed(seed, day as u64))?;
    Ok(tuned.apply(model))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayRecall {
    pub day: usize,
    /// Model rebuilt and re-tuned from the previous day.
    pub retrained: f64,
    /// Model tuned on day 0 and never updated.
    pub frozen: f64,
    pub retrained_frames: f64,
    pub frozen_frames: f64,
}

/// Day 0 tunes the first model. Each later day is queried with the frozen
/// day-0 model and with a model retrained on the previous day's data.
pub fn staleness(ds: &TrajectoryDataset, goals: &Goals, settings: &TrackingSettings, seed: u64) -> Result<Vec<DayRecall>> {
    let n = ds.grid.n_cameras;
    let frozen = train_day(ds, 0, goals, settings, seed)?;
    let mut out = Vec::with_capacity(ds.n_days());
    let mut retrained = frozen.clone();
    for d in 0..ds.n_days() {
        if d > 0 {
            retrained = train_day(ds, d - 1, goals, settings, seed)?;
        }
        let queries = DayQueries::new(ds.day(d), n, settings.window)?;
        let r = queries.evaluate(&retrained, goals)?;
        let f = queries.evaluate(&frozen, goals)?;
        out.push(DayRecall {
            day: d,
            retrained: r.metric(metric::ACCURACY)?,
            frozen: f.metric(metric::ACCURACY)?,
            retrained_frames: r.metric(metric::FRAMES_SEARCHED)?,
            frozen_frames: f.metric(metric::FRAMES_SEARCHED)?,
        });
    }
    Ok(out)
}
