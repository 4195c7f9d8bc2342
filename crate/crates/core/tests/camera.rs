use std::collections::{BTreeMap, BTreeSet};

use fleet_core::apps::camera::*;
use fleet_core::*;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn v(target: usize, camera: usize, minute: u32) -> Visit {
    Visit { target, camera, minute }
}

fn recall_goal() -> Goals {
    Goals::new(vec![Goal::at_least(metric::ACCURACY, 0.9)]).unwrap()
}

fn toy_day() -> Vec<Visit> {
    vec![
        v(0, 0, 0),
        v(0, 1, 2),
        v(0, 2, 3),
        v(0, 2, 7),
        v(1, 0, 1),
        v(1, 1, 2),
        v(1, 0, 4),
        v(2, 1, 0),
        v(2, 2, 4),
        v(2, 0, 5),
        v(2, 1, 9),
        v(3, 2, 2),
        v(3, 0, 3),
        v(3, 1, 4),
        v(4, 0, 6),
        v(4, 2, 8),
    ]
}

/// May the search go from a frame at `a` to camera `j`, `o` minutes later?
fn allowed(model: &CorrelationModel, a: usize, j: usize, o: u32) -> bool {
    a == j
        || (model.spatial(a, j) >= model.spatial_threshold && model.temporal(a, j, o) >= model.temporal_threshold)
}

/// Scans every frame of the day until no new frame of the target is
/// reachable from the sighting or from something already found.
fn brute_force(q: Sighting, model: &CorrelationModel, day: &[Visit]) -> (BTreeSet<(usize, u32)>, usize) {
    let w = model.window;
    let later: Vec<(usize, u32)> =
        day.iter().filter(|x| x.target == q.target && x.minute > q.minute).map(|x| (x.camera, x.minute)).collect();
    let mut found: BTreeSet<(usize, u32)> = BTreeSet::new();
    loop {
        let anchors: Vec<(usize, u32)> = std::iter::once((q.camera, q.minute)).chain(found.iter().copied()).collect();
        let grown: Vec<(usize, u32)> = later
            .iter()
            .copied()
            .filter(|f| !found.contains(f))
            .filter(|&(j, m)| anchors.iter().any(|&(a, t)| m > t && m - t <= w && allowed(model, a, j, m - t)))
            .collect();
        if grown.is_empty() {
            break;
        }
        found.extend(grown);
    }
    let mut examined = BTreeSet::new();
    for (a, t) in std::iter::once((q.camera, q.minute)).chain(found.iter().copied()) {
        for j in 0..model.n_cameras {
            for o in 1..=w {
                if allowed(model, a, j, o) {
                    examined.insert((j, t + o));
                }
            }
        }
    }
    (found, examined.len())
}

#[test]
fn track_query_matches_a_full_scan() {
    let day = toy_day();
    let index = DayIndex::new(&day, 3).unwrap();
    let base = build_correlations(&day, 3, 4).unwrap();
    let levels = [0.0, 0.2, 0.34, 0.5, 0.67, 1.0, 1.5];
    for &s in &levels {
        for &t in &levels[..6] {
            let model = base.clone().with_thresholds(s, t);
            for q in index.queries() {
                let got = track_query(q, &model, &index).unwrap();
                let (found, examined) = brute_force(q, &model, &day);
                assert_eq!(got.returned.iter().copied().collect::<BTreeSet<_>>(), found, "s {s} t {t} q {q:?}");
                assert_eq!(got.frames_searched, examined, "s {s} t {t} q {q:?}");
                let later = day.iter().filter(|x| x.target == q.target && x.minute > q.minute).count();
                let recall = if later == 0 { 1.0 } else { found.len() as f64 / later as f64 };
                assert!((got.recall - recall).abs() < 1e-12);
                assert!((got.precision - found.len() as f64 / examined as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn camera_eval_matches_hand_totals_on_the_toy() {
    let day = toy_day();
    let index = DayIndex::new(&day, 3).unwrap();
    let model = build_correlations(&day, 3, 4).unwrap().with_thresholds(0.5, 0.3);
    let open = model.clone().with_thresholds(0.0, 0.0);
    let queries = index.queries();
    let results: Vec<QueryResult> = queries.iter().map(|&q| track_query(q, &model, &index).unwrap()).collect();
    let report = camera_eval(&results, &recall_goal()).unwrap();

    let (mut recall, mut searched, mut exhaustive) = (0.0, 0, 0);
    for &q in &queries {
        let (found, examined) = brute_force(q, &model, &day);
        let later = day.iter().filter(|x| x.target == q.target && x.minute > q.minute).count();
        recall += found.len() as f64 / later as f64;
        searched += examined;
        exhaustive += brute_force(q, &open, &day).1;
    }
    let k = queries.len() as f64;
    assert!((report.metric(metric::ACCURACY).unwrap() - recall / k).abs() < 1e-12);
    assert!((report.metric(metric::FRAMES_SEARCHED).unwrap() - searched as f64 / k).abs() < 1e-12);
    assert!((report.metric(metric::THROUGHPUT).unwrap() - exhaustive as f64 / searched as f64).abs() < 1e-12);

    let cached = DayQueries::new(&day, 3, 4).unwrap().evaluate(&model, &recall_goal()).unwrap();
    assert_eq!(cached, report);
}

#[test]
fn exhaustive_and_prune_everything_extremes() {
    let ds = gen_trajectories(16, 60, 1, 0.0, 4).unwrap();
    let day = ds.day(0);
    let index = DayIndex::new(day, 16).unwrap();
    let model = build_correlations(day, 16, 10).unwrap();
    let open: Vec<QueryResult> =
        index.queries().into_iter().map(|q| track_query(q, &model, &index).unwrap()).collect();
    let open_report = camera_eval(&open, &recall_goal()).unwrap();
    assert_eq!(open_report.metric(metric::ACCURACY).unwrap(), 1.0);
    assert_eq!(open_report.metric(metric::THROUGHPUT).unwrap(), 1.0);
    assert!(open_report.finished);

    let closed = model.clone().with_thresholds(1.5, 0.0);
    for q in index.queries() {
        let r = track_query(q, &closed, &index).unwrap();
        assert!(r.returned.iter().all(|&(c, _)| c == q.camera));
        assert!(r.frames_searched <= track_query(q, &model, &index).unwrap().frames_searched);
    }
    let bad = Sighting { target: 0, camera: 99, minute: 0 };
    assert!(track_query(bad, &model, &index).is_err());
}

#[test]
fn correlation_counts_on_a_fixed_path() {
    // Target 0 passes 0 -> 1 one minute apart in every window it occupies.
    let day: Vec<Visit> = (0..5).flat_map(|k| [v(0, 0, 6 * k), v(0, 1, 6 * k + 1)]).collect();
    let m = build_correlations(&day, 3, 4).unwrap();
    assert_eq!(m.spatial(0, 1), 1.0);
    assert_eq!(m.spatial(1, 0), 0.0);
    assert_eq!(m.spatial(0, 2), 0.0);
    assert_eq!(m.temporal(0, 1, 1), 1.0);
    for i in 0..3 {
        assert_eq!(m.spatial(i, i), 1.0);
    }
}

/// Counts of consecutive camera hops `(from, to)` in one day.
fn hop_counts(day: &[Visit]) -> BTreeMap<(usize, usize), f64> {
    let mut counts = BTreeMap::new();
    for w in day.windows(2) {
        if w[0].target == w[1].target {
            *counts.entry((w[0].camera, w[1].camera)).or_insert(0.0) += 1.0;
        }
    }
    counts
}

/// p-value of the two-sample chi-squared homogeneity test over hop cells,
/// pooling cells whose expected count falls below five.
fn homogeneity_p(a: &[Visit], b: &[Visit]) -> f64 {
    let (ca, cb) = (hop_counts(a), hop_counts(b));
    let keys: BTreeSet<_> = ca.keys().chain(cb.keys()).copied().collect();
    let (na, nb): (f64, f64) = (ca.values().sum(), cb.values().sum());
    let total = na + nb;
    let mut cells = Vec::new();
    let (mut pool_a, mut pool_b) = (0.0, 0.0);
    for k in keys {
        let (x, y) = (ca.get(&k).copied().unwrap_or(0.0), cb.get(&k).copied().unwrap_or(0.0));
        if (x + y) * na.min(nb) / total < 5.0 {
            pool_a += x;
            pool_b += y;
        } else {
            cells.push((x, y));
        }
    }
    if pool_a + pool_b > 0.0 {
        cells.push((pool_a, pool_b));
    }
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let row = x + y;
        let (ea, eb) = (row * na / total, row * nb / total);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let df = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(stat)
}

#[test]
fn zero_drift_days_share_a_hop_distribution() {
    let still = gen_trajectories(36, 400, 3, 0.0, 8).unwrap();
    let p = homogeneity_p(still.day(1), still.day(2));
    assert!(p > 1e-3, "same-distribution days rejected, p = {p}");

    let drifting = gen_trajectories(36, 400, 4, 1.0, 8).unwrap();
    let p = homogeneity_p(drifting.day(0), drifting.day(3));
    assert!(p < 1e-6, "rotated corridors not detected, p = {p}");
}

#[test]
fn single_camera_dataset_stays_put() {
    let ds = gen_trajectories(1, 5, 2, 0.3, 1).unwrap();
    assert!(ds.days.iter().flatten().all(|x| x.camera == 0));
}

#[test]
fn trajectories_are_valid_and_reproducible() {
    let a = gen_trajectories(20, 30, 3, 0.1, 12).unwrap();
    assert_eq!(a, gen_trajectories(20, 30, 3, 0.1, 12).unwrap());
    for day in &a.days {
        let index = DayIndex::new(day, 20).unwrap();
        for t in 0..30 {
            let frames = index.frames_of(t);
            assert!(frames.windows(2).all(|w| w[0].1 < w[1].1), "timestamps must strictly increase");
        }
    }
}

#[test]
fn porto_rows_snap_onto_the_grid() {
    let csv = "target_id,timestamp,lon,lat\n\
               a,0,-8.60,41.15\n\
               a,30,-8.60,41.15\n\
               a,60,-8.50,41.10\n\
               b,86400,-8.55,41.12\n";
    let ds = read_porto_csv(csv.as_bytes(), 4).unwrap();
    assert_eq!(ds.n_days(), 2);
    assert_eq!(ds.n_targets, 2);
    // The repeat within the first minute collapses into one sighting.
    assert_eq!(ds.day(0).len(), 2);
    assert_eq!(ds.day(0)[0].camera, ds.grid.camera_at(0, 0).unwrap());
    assert_eq!(ds.day(0)[1].camera, ds.grid.camera_at(1, 1).unwrap());
    assert!(read_porto_csv("target_id,timestamp,lon,lat\nx,0,nan,1\n".as_bytes(), 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lowering_thresholds_never_loses_frames(
        seed in 0u64..1_000,
        s_lo in 0.0f64..1.0, s_extra in 0.0f64..0.5,
        t_lo in 0.0f64..0.5, t_extra in 0.0f64..0.5,
    ) {
        let ds = gen_trajectories(9, 25, 1, 0.0, seed).unwrap();
        let day = ds.day(0);
        let index = DayIndex::new(day, 9).unwrap();
        let model = build_correlations(day, 9, 6).unwrap();
        let loose = model.clone().with_thresholds(s_lo, t_lo);
        let tight = model.with_thresholds(s_lo + s_extra, t_lo + t_extra);
        for q in index.queries() {
            let a = track_query(q, &loose, &index).unwrap();
            let b = track_query(q, &tight, &index).unwrap();
            prop_assert!(a.recall >= b.recall);
            prop_assert!(a.frames_searched >= b.frames_searched);
        }
    }

    #[test]
    fn correlation_entries_are_shares(seed in 0u64..1_000, window in 2u32..12) {
        let ds = gen_trajectories(12, 20, 1, 0.0, seed).unwrap();
        let m = build_correlations(ds.day(0), 12, window).unwrap();
        for i in 0..12 {
            prop_assert_eq!(m.spatial(i, i), 1.0);
            for j in 0..12 {
                prop_assert!((0.0..=1.0).contains(&m.spatial(i, j)));
                let mass: f64 = (1..=window).map(|o| m.temporal(i, j, o)).sum();
                prop_assert!(mass.abs() < 1e-9 || (mass - 1.0).abs() < 1e-9);
            }
        }
    }
}
