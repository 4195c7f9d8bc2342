//! Between-mission federated learning: retrain one SA variant per data
//! aggregation, fit each agent's mixing weights over the variants and fold
//! those weights into per-model usefulness for the edge scheduler.

use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::{contract, FleetError, Result};
use crate::fleetspec::FleetSpec;
use crate::goals::Goals;
use crate::mission::{run_mission, MissionOptions, Transition};
use crate::models::{q_update, reward, LearningParams, ModelEnsemble, QTable, RewardSpec};
use crate::scalar::Real;
use crate::seeds::{rng_for, sub_seed};
use crate::shaping::{loss, minimize, BoSettings, CandidatePool};

/// Largest swarm for which every agent subset gets its own variant.
pub const MAX_POWERSET_AGENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    Powerset,
    PerAgent,
}

impl AggregationMode {
    /// Powerset while it stays small enough, per-agent beyond.
    pub fn for_swarm(n_agents: usize) -> Self {
        if n_agents <= MAX_POWERSET_AGENTS {
            Self::Powerset
        } else {
            Self::PerAgent
        }
    }
}

/// Agent subsets whose pooled data each train one variant. Index 0 is
/// always the empty subset, i.e. the untouched base model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationSet {
    subsets: Vec<Vec<usize>>,
}

impl AggregationSet {
    pub fn new(subsets: Vec<Vec<usize>>) -> Result<Self> {
        if subsets.first().is_none_or(|s| !s.is_empty()) {
            return Err(contract("aggregation set must start with the empty subset"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for s in &subsets {
            let mut key = s.clone();
            key.sort_unstable();
            key.dedup();
            if key.len() != s.len() || !seen.insert(key) {
                return Err(contract(format!("duplicate aggregation subset {s:?}")));
            }
        }
        Ok(Self { subsets })
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }
}

/// Bitmask order for the powerset: `{}, {0}, {1}, {0,1}, {2}, ...`.
pub fn enumerate_aggregations(n_agents: usize, mode: AggregationMode) -> Result<AggregationSet> {
    if n_agents == 0 {
        return Err(contract("aggregation needs at least one agent"));
    }
    let subsets = match mode {
        AggregationMode::Powerset => {
            if n_agents > MAX_POWERSET_AGENTS {
                return Err(FleetError::TooManyAgents(n_agents));
            }
            (0u32..1 << n_agents).map(|mask| (0..n_agents).filter(|i| mask & (1 << i) != 0).collect()).collect()
        }
        AggregationMode::PerAgent => std::iter::once(Vec::new()).chain((0..n_agents).map(|i| vec![i])).collect(),
    };
    Ok(AggregationSet { subsets })
}

/// Splits a mission's interleaved transitions into per-agent traces.
pub fn split_by_agent<T: Clone>(transitions: &[Transition<T>], n_agents: usize) -> Vec<Vec<Transition<T>>> {
    let mut out = vec![Vec::new(); n_agents];
    for t in transitions {
        if let Some(v) = out.get_mut(t.agent) {
            v.push(t.clone());
        }
    }
    out
}

/// One variant per subset: `base` further trained by replaying the pooled
/// traces of the subset's agents `sweeps` times, rewards recomputed from the
/// recorded features under `spec`.
pub fn retrain_variants<T: Real>(
    base: &QTable<T>,
    traces: &[Vec<Transition<T>>],
    aggs: &AggregationSet,
    spec: &RewardSpec<T>,
    params: &LearningParams<T>,
    sweeps: usize,
) -> Result<Vec<QTable<T>>> {
    if let Some(&a) = aggs.subsets().iter().flatten().find(|&&a| a >= traces.len()) {
        return Err(FleetError::MissingTrace(a));
    }
    let mut variants = Vec::with_capacity(aggs.len());
    for subset in aggs.subsets() {
        let mut table = base.clone();
        for _ in 0..sweeps {
            for &a in subset {
                for t in &traces[a] {
                    let r = reward(&t.ssv, spec)?;
                    q_update(&mut table, t.from, t.action, t.to, r, params, &t.valid_next);
                }
            }
        }
        variants.push(table);
    }
    Ok(variants)
}

/// Divides by the sum; the all-zero vector maps to uniform weights.
pub fn project_to_simplex<T: Real>(raw: &[T]) -> Result<Vec<T>> {
    if raw.is_empty() {
        return Err(contract("cannot project an empty vector"));
    }
    if let Some(x) = raw.iter().find(|x| !(**x >= T::zero()) || !x.is_finite()) {
        return Err(contract(format!("simplex projection of negative or non-finite entry {x}")));
    }
    let sum: T = raw.iter().copied().sum();
    if sum == T::zero() {
        let u = T::one() / T::lit(raw.len() as f64);
        return Ok(vec![u; raw.len()]);
    }
    Ok(raw.iter().map(|&x| x / sum).collect())
}

/// Everything a weight search holds fixed while one agent's mix varies.
pub struct WeightSearch<'a, T> {
    pub fleet: &'a FleetSpec<T>,
    pub contexts: &'a [ExecutionContext],
    pub spec: &'a RewardSpec<T>,
    pub goals: &'a Goals,
    /// Current ensembles of every agent; empty runs the others on the base variant.
    pub peers: &'a [ModelEnsemble<T>],
    pub settings: &'a BoSettings<T>,
    pub opts: MissionOptions,
}

impl<T: Real> WeightSearch<'_, T> {
    /// Summed mission loss over the contexts with `agent` mixing `variants` by `x`.
    pub fn evaluate(&self, agent: usize, variants: &[QTable<T>], x: Vec<T>, seed: u64) -> Result<(T, bool)> {
        let n = self.fleet.n_agents;
        if agent >= n {
            return Err(contract(format!("agent {agent} outside a swarm of {n}")));
        }
        let mine = ModelEnsemble::new(variants.to_vec(), x)?;
        let models: Vec<ModelEnsemble<T>> = (0..n)
            .map(|i| {
                if i == agent {
                    mine.clone()
                } else if self.peers.len() == n {
                    self.peers[i].clone()
                } else {
                    ModelEnsemble::single(variants[0].clone())
                }
            })
            .collect();
        let mut total = 0.0;
        let mut all_met = true;
        for (k, ctx) in self.contexts.iter().enumerate() {
            let out = run_mission(self.fleet, ctx, &models, self.spec, &self.opts, None, sub_seed(seed, k as u64))?;
            total += loss(self.goals, &out.report, &self.fleet.costs)?;
            all_met &= self.goals.all_met(&out.report)?;
        }
        Ok((T::lit(total), all_met))
    }
}

/// Bayesian search for `agent`'s simplex weights over `variants`: raw draws
/// in the unit cube are projected onto the simplex before each simulated
/// mission. Returns the least-loss goal-meeting mix (least loss overall when
/// none meets the goals).
pub fn optimize_weights<T: Real>(
    agent: usize,
    variants: &[QTable<T>],
    search: &WeightSearch<'_, T>,
    seed: u64,
) -> Result<Vec<T>> {
    if variants.is_empty() {
        return Err(contract("weight search needs at least one variant"));
    }
    if search.contexts.is_empty() {
        return Err(contract("weight search needs at least one context"));
    }
    if variants.len() == 1 {
        return Ok(vec![T::one()]);
    }
    let k = variants.len();
    let mut rng = rng_for(seed, 0x0a11 + agent as u64);
    let run = minimize(
        search.settings,
        vec![T::one(); k],
        &CandidatePool::Random,
        &mut rng,
        |r| (0..k).map(|_| T::lit(rand::Rng::gen::<f64>(r))).collect(),
        |raw| search.evaluate(agent, variants, project_to_simplex(raw)?, seed),
    )?;
    project_to_simplex(&run.best_trial().point)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelUsefulness {
    pub subset: Vec<usize>,
    pub usefulness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UsefulnessReport {
    pub models: Vec<ModelUsefulness>,
    /// The per-agent weight vectors averaged into `models`.
    #[serde(default)]
    pub agent_weights: Vec<Vec<f64>>,
}

impl UsefulnessReport {
    pub fn usefulness(&self) -> Vec<f64> {
        self.models.iter().map(|m| m.usefulness).collect()
    }

    /// Index of the most useful model, lowest index on ties.
    pub fn most_useful(&self) -> usize {
        let mut best = 0;
        for (i, m) in self.models.iter().enumerate() {
            if m.usefulness > self.models[best].usefulness {
                best = i;
            }
        }
        best
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FleetError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FleetError::Parse(e.to_string()))
    }
}

/// Usefulness of model `k` is the plain mean of `x_i[k]` over agents.
pub fn aggregate_usefulness<T: Real>(aggs: &AggregationSet, weights: &[Vec<T>]) -> Result<UsefulnessReport> {
    if weights.is_empty() {
        return Err(contract("usefulness needs at least one agent's weights"));
    }
    let k = aggs.len();
    if let Some(w) = weights.iter().find(|w| w.len() != k) {
        return Err(contract(format!("weight vector of length {} for {k} models", w.len())));
    }
    let n = weights.len() as f64;
    let models = aggs
        .subsets()
        .iter()
        .enumerate()
        .map(|(j, subset)| ModelUsefulness {
            subset: subset.clone(),
            usefulness: (weights.iter().map(|w| w[j].as_f64()).sum::<f64>() / n).clamp(0.0, 1.0),
        })
        .collect();
    Ok(UsefulnessReport { models, agent_weights: weights.iter().map(|w| w.iter().map(|x| x.as_f64()).collect()).collect() })
}
