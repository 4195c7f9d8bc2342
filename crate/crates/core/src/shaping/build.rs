use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::{contract, FleetError, Result};
use crate::fleetspec::FleetSpec;
use crate::goals::Goals;
use crate::mission::{replay, run_mission, MissionOptions};
use crate::models::{ModelEnsemble, QTable, RewardSpec};
use crate::scalar::Real;
use crate::seeds::{rng_for, sub_seed};
use crate::shaping::bo::{minimize, BoSettings, CandidatePool};
use crate::shaping::loss::loss;

/// Where shaping candidates come from.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidateSource<T> {
    /// Uniform draws over the full bounds, EI-ranked.
    Random,
    /// A fixed candidate list searched without repetition.
    Grid(Vec<RewardSpec<T>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EpochRecord<T> {
    pub epoch: usize,
    pub loss: T,
    pub goals_met: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ShapingResult<T> {
    pub weights: Vec<T>,
    pub t_u: T,
    pub t_v: u32,
    pub best_loss: T,
    pub goals_met: bool,
    pub history: Vec<EpochRecord<T>>,
}

impl<T: Real> ShapingResult<T> {
    pub fn spec(&self) -> RewardSpec<T> {
        RewardSpec { weights: self.weights.clone(), t_u: self.t_u, t_v: self.t_v }
    }

    /// Best goal-meeting loss after each epoch.
    pub fn best_so_far(&self) -> Vec<Option<T>> {
        let mut best: Option<T> = None;
        self.history
            .iter()
            .map(|h| {
                if h.goals_met && best.is_none_or(|b| h.loss < b) {
                    best = Some(h.loss);
                }
                best
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FleetError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FleetError::Parse(e.to_string()))
    }

    pub fn write_loss_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| FleetError::Parse(e.to_string());
        w.write_record(["epoch", "loss", "goals_met"]).map_err(err)?;
        for h in &self.history {
            w.write_record([h.epoch.to_string(), h.loss.to_string(), h.goals_met.to_string()]).map_err(err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Unit-cube encoding of reward candidates: the `m` weights, `T_u / m` and
/// `T_v / group_size` (rounded back to an integer on decode).
#[derive(Debug, Clone, Copy)]
struct Encoding {
    m: usize,
    group_size: usize,
}

impl Encoding {
    fn decode<T: Real>(&self, u: &[T]) -> RewardSpec<T> {
        let clamp = |x: T| x.max(T::zero()).min(T::one());
        let weights = u[..self.m].iter().map(|&x| clamp(x)).collect();
        let t_u = clamp(u[self.m]) * T::lit(self.m as f64);
        let t_v = (clamp(u[self.m + 1]).as_f64() * self.group_size as f64).round() as u32;
        RewardSpec { weights, t_u, t_v }
    }

    fn encode<T: Real>(&self, spec: &RewardSpec<T>) -> Vec<T> {
        let mut u = spec.weights.clone();
        u.push(spec.t_u / T::lit(self.m.max(1) as f64));
        u.push(T::lit(spec.t_v as f64 / self.group_size as f64));
        u
    }

    fn sample<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.m + 2).map(|_| T::lit(rng.gen::<f64>())).collect()
    }
}

/// Simulates one mission per context with `spec` and the fixed base model;
/// returns the summed loss and whether every context met the goals.
pub fn evaluate_spec<T: Real>(
    fleet: &FleetSpec<T>,
    contexts: &[ExecutionContext],
    base: &QTable<T>,
    spec: &RewardSpec<T>,
    goals: &Goals,
    opts: &MissionOptions,
    seed: u64,
) -> Result<(T, bool)> {
    let models = [ModelEnsemble::single(base.clone())];
    let mut total = 0.0;
    let mut all_met = true;
    for (k, ctx) in contexts.iter().enumerate() {
        let out = run_mission(fleet, ctx, &models, spec, opts, None, sub_seed(seed, k as u64))?;
        total += loss(goals, &out.report, &fleet.costs)?;
        all_met &= goals.all_met(&out.report)?;
    }
    Ok((T::lit(total), all_met))
}

/// Bayesian search for the reward weights and gate thresholds with the
/// least summed loss over `contexts` among candidates meeting all goals.
#[allow(clippy::too_many_arguments)]
pub fn build_reward<T: Real>(
    contexts: &[ExecutionContext],
    fleet: &FleetSpec<T>,
    base: &QTable<T>,
    settings: &BoSettings<T>,
    source: &CandidateSource<T>,
    goals: &Goals,
    seed: u64,
) -> Result<ShapingResult<T>> {
    if contexts.is_empty() {
        return Err(contract("reward shaping needs at least one context"));
    }
    let enc = Encoding { m: fleet.n_features(), group_size: fleet.tiling.group_size() };
    let pool = match source {
        CandidateSource::Random => CandidatePool::Random,
        CandidateSource::Grid(specs) => CandidatePool::Grid(specs.iter().map(|s| enc.encode(s)).collect()),
    };
    let initial = vec![T::one(); enc.m + 2];
    let opts = MissionOptions::default();
    let mut rng = rng_for(seed, 0x5ea7);
    let run = minimize(settings, initial, &pool, &mut rng, |r| enc.sample(r), |u| {
        evaluate_spec(fleet, contexts, base, &enc.decode(u), goals, &opts, seed)
    })?;
    let best = run.best_trial();
    let spec = enc.decode(&best.point);
    Ok(ShapingResult {
        weights: spec.weights,
        t_u: spec.t_u,
        t_v: spec.t_v,
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

/// Further trains `base` with epsilon-greedy missions over `contexts`, then
/// keeps whichever of the retrained and original tables has the lower
/// greedy loss on those contexts (the retrained one on ties).
pub fn retrain_sa<T: Real>(
    fleet: &FleetSpec<T>,
    base: &QTable<T>,
    contexts: &[ExecutionContext],
    spec: &RewardSpec<T>,
    episodes: usize,
    seed: u64,
) -> Result<QTable<T>> {
    if episodes == 0 {
        return Err(contract("retraining needs at least one episode"));
    }
    if contexts.is_empty() {
        return Ok(base.clone());
    }
    let explore = MissionOptions { epsilon: Some(fleet.learning.epsilon.as_f64()), ..MissionOptions::default() };
    let mut table = base.clone();
    for ep in 0..episodes {
        for (k, ctx) in contexts.iter().enumerate() {
            let models = [ModelEnsemble::single(table.clone())];
            let stream = (ep * contexts.len() + k) as u64;
            let out = run_mission(fleet, ctx, &models, spec, &explore, None, sub_seed(seed, stream))?;
            replay(&mut table, &out.trace.transitions, &fleet.learning);
        }
    }
    let greedy = MissionOptions::greedy();
    let (retrained, _) = evaluate_spec(fleet, contexts, &table, spec, &fleet.goals, &greedy, seed)?;
    let (original, _) = evaluate_spec(fleet, contexts, base, spec, &fleet.goals, &greedy, seed)?;
    Ok(if retrained <= original { table } else { base.clone() })
}
