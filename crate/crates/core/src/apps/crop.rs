//! Synthetic crop-yield scouting: spatially correlated yield fields, the
//! three-channel Map and the extrapolated yield-map Eval.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::apps::idw::extrapolate;
use crate::context::ExecutionContext;
use crate::error::{contract, Result};
use crate::features::{normalize_features, FeatureSpace};
use crate::fleetspec::{EvalFn, MapFn, Perf};
use crate::goals::{metric, EvalReport};
use crate::grid::GridDims;
use crate::scalar::Real;
use crate::seeds::rng_for;

pub const CROP_CHANNELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldParams {
    /// Box-blur passes applied to the raw noise.
    pub smoothness: usize,
    /// Standard deviation of the ExG-analog sensing noise.
    pub exg_noise: f64,
    /// Extra blur passes separating the LAI-analog from the yield.
    pub lai_blur: usize,
    pub lai_noise: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        Self { smoothness: 12, exg_noise: 0.01, lai_blur: 2, lai_noise: 0.05 }
    }
}

fn box_blur(values: &[f64], dims: GridDims) -> Vec<f64> {
    let (w, h) = (dims.width as isize, dims.height as isize);
    let mut out = vec![0.0; values.len()];
    for r in 0..h {
        for c in 0..w {
            let mut sum = 0.0;
            let mut n = 0.0;
            for dr in -1..=1 {
                for dc in -1..=1 {
                    let (rr, cc) = (r + dr, c + dc);
                    if rr >= 0 && rr < h && cc >= 0 && cc < w {
                        sum += values[(rr * w + cc) as usize];
                        n += 1.0;
                    }
                }
            }
            out[(r * w + c) as usize] = sum / n;
        }
    }
    out
}

fn min_max(values: &mut [f64]) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for v in values.iter_mut() {
        *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
    }
}

fn smooth_noise<R: Rng>(dims: GridDims, passes: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dims.n_states()).map(|_| rng.gen()).collect();
    for _ in 0..passes {
        v = box_blur(&v, dims);
    }
    min_max(&mut v);
    v
}

/// Builds the sensed channels for a latent yield map.
fn sense_truth<R: Rng>(id: String, dims: GridDims, truth: Vec<f64>, params: &FieldParams, rng: &mut R) -> Result<ExecutionContext> {
    let exg = Normal::new(0.0, params.exg_noise.max(0.0)).map_err(|e| contract(e.to_string()))?;
    let lai_n = Normal::new(0.0, params.lai_noise.max(0.0)).map_err(|e| contract(e.to_string()))?;
    let mut lai = truth.clone();
    for _ in 0..params.lai_blur {
        lai = box_blur(&lai, dims);
    }
    let mut cells = Vec::with_capacity(truth.len() * CROP_CHANNELS);
    for (i, &t) in truth.iter().enumerate() {
        cells.push((t + exg.sample(rng)).clamp(0.0, 1.0));
        cells.push((lai[i] + lai_n.sample(rng)).clamp(0.0, 1.0));
        cells.push(rng.gen::<f64>());
    }
    ExecutionContext::new(id, dims, CROP_CHANNELS, cells, truth)
}

/// A seeded synthetic field with `smoothness` blur passes.
pub fn gen_field(width: usize, height: usize, smoothness: usize, seed: u64) -> Result<ExecutionContext> {
    gen_field_with(width, height, &FieldParams { smoothness, ..FieldParams::default() }, seed)
}

pub fn gen_field_with(width: usize, height: usize, params: &FieldParams, seed: u64) -> Result<ExecutionContext> {
    if width == 0 || height == 0 {
        return Err(contract("field dimensions must be at least 1"));
    }
    let dims = GridDims::new(width, height);
    let mut rng = rng_for(seed, 0x0f1e1d);
    let truth = smooth_noise(dims, params.smoothness, &mut rng);
    sense_truth(format!("field-{seed}"), dims, truth, params, &mut rng)
}

/// Blends a fresh field into `field`'s yield with weight `amount` and
/// re-senses the result.
pub fn drift_field(field: &ExecutionContext, params: &FieldParams, amount: f64, seed: u64) -> Result<ExecutionContext> {
    if !(0.0..=1.0).contains(&amount) {
        return Err(contract(format!("drift {amount} outside [0, 1]")));
    }
    let dims = field.dims();
    let mut rng = rng_for(seed, 0xd21f7);
    let fresh = smooth_noise(dims, params.smoothness, &mut rng);
    let mut truth: Vec<f64> = field.ground_truth().iter().zip(&fresh).map(|(&a, &b)| (1.0 - amount) * a + amount * b).collect();
    min_max(&mut truth);
    sense_truth(format!("{}+{seed}", field.context_id), dims, truth, params, &mut rng)
}

/// Lag-1 (horizontal and vertical) autocorrelation of one channel.
pub fn lag1_autocorrelation(ctx: &ExecutionContext, channel: usize) -> f64 {
    let dims = ctx.dims();
    let vals: Vec<f64> = dims.states().map(|s| ctx.sense(s)[channel]).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum();
    if var == 0.0 {
        return 0.0;
    }
    let mut cov = 0.0;
    let mut pairs = 0usize;
    for s in dims.states() {
        for n in [crate::grid::ActionId::East, crate::grid::ActionId::South] {
            if let Some(t) = dims.apply(s, n) {
                cov += (vals[dims.index(s)] - mean) * (vals[dims.index(t)] - mean);
                pairs += 1;
            }
        }
    }
    (cov / pairs as f64) / (var / vals.len() as f64)
}

/// Extractor pipeline `[ExG, LAI, noise]` with fixed normalization bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CropMap {
    pub norms: Vec<(f64, f64)>,
}

impl Default for CropMap {
    fn default() -> Self {
        Self { norms: vec![(0.0, 1.0); CROP_CHANNELS] }
    }
}

/// Maps one raw crop record to its normalized SSV payload.
pub fn crop_map<T: Real>(raw: &[f64], norms: &[(f64, f64)]) -> Result<Vec<T>> {
    if raw.len() != CROP_CHANNELS {
        return Err(contract(format!("crop record has {} channels, expected {CROP_CHANNELS}", raw.len())));
    }
    let raw: Vec<T> = raw.iter().map(|&x| T::lit(x)).collect();
    let norms: Vec<(T, T)> = norms.iter().map(|&(a, b)| (T::lit(a), T::lit(b))).collect();
    normalize_features(&raw, &norms)
}

impl<T: Real> MapFn<T> for CropMap {
    fn n_features(&self) -> usize {
        CROP_CHANNELS
    }

    fn map(&self, raw: &[f64]) -> Result<Vec<T>> {
        crop_map(raw, &self.norms)
    }
}

/// Skill of a predicted map against the truth: `1 - MAE / MAD`, where MAD
/// is the mean absolute deviation of the truth around its mean, clamped to
/// `[0, 1]`. A flat truth scores `1 - MAE`.
pub fn map_accuracy(predicted: &[f64], truth: &[f64]) -> f64 {
    let n = truth.len() as f64;
    let mae = predicted.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / n;
    let mean = truth.iter().sum::<f64>() / n;
    let mad = truth.iter().map(|t| (t - mean).abs()).sum::<f64>() / n;
    if mad < 1e-12 {
        return (1.0 - mae).clamp(0.0, 1.0);
    }
    (1.0 - mae / mad).clamp(0.0, 1.0)
}

/// Yield-map Eval over every SSV gathered in the mission.
pub fn crop_eval<T: Real>(fs: &FeatureSpace<T>, perf: &Perf, ctx: &ExecutionContext) -> Result<EvalReport> {
    let dims = ctx.dims();
    let n = dims.n_states() as f64;
    let mut report = EvalReport { finished: perf.groups_done && !fs.is_empty(), ..EvalReport::default() }
        .with(metric::COVERAGE, fs.len() as f64 / n)
        .with(metric::VISITED, fs.len() as f64)
        .with(metric::STATES, n)
        .with(metric::STEPS, perf.steps as f64)
        .with(metric::AGENT_ENERGY, perf.agent_energy)
        .with(metric::EDGE_ENERGY, perf.edge_energy);
    if fs.is_empty() {
        return Ok(report);
    }
    let visited: BTreeMap<_, _> = fs.vectors().iter().map(|v| (v.origin_state, v.features[0].as_f64())).collect();
    let map = extrapolate(&visited, dims)?;
    report.set(metric::ACCURACY, map_accuracy(&map, ctx.ground_truth()));
    report.artifact = Some(map);
    Ok(report)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CropEval;

impl<T: Real> EvalFn<T> for CropEval {
    fn metrics(&self) -> Vec<&'static str> {
        vec![
            metric::ACCURACY,
            metric::COVERAGE,
            metric::VISITED,
            metric::STATES,
            metric::STEPS,
            metric::AGENT_ENERGY,
            metric::EDGE_ENERGY,
            metric::COMPLETION,
        ]
    }

    fn eval(&self, ctx: &ExecutionContext, fs: &FeatureSpace<T>, perf: &Perf) -> Result<EvalReport> {
        crop_eval(fs, perf, ctx)
    }
}
