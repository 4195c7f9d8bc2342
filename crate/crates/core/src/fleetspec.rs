//! The swarm description compiled into missions: agents, contexts, actions,
//! the Map/Eval plugs, tiling, learning parameters, goals and costs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::{contract, Result};
use crate::features::FeatureSpace;
use crate::goals::{EvalReport, Goals};
use crate::grid::{ActionId, Tiling};
use crate::models::LearningParams;
use crate::scalar::Real;

/// Converts one raw sensor record into a normalized feature vector.
pub trait MapFn<T>: Send + Sync {
    fn n_features(&self) -> usize;
    fn map(&self, raw: &[f64]) -> Result<Vec<T>>;
}

/// Per-mission counters handed to Eval alongside the gathered features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Perf {
    /// Mission makespan in ticks.
    pub steps: u64,
    pub agent_energy: f64,
    pub edge_energy: f64,
    /// Every agent's assigned groups were gated or exhausted.
    pub groups_done: bool,
}

/// Builds the mission evaluation from everything the swarm sensed.
pub trait EvalFn<T>: Send + Sync {
    /// Names of the metrics every report carries.
    fn metrics(&self) -> Vec<&'static str>;
    fn eval(&self, ctx: &ExecutionContext, fs: &FeatureSpace<T>, perf: &Perf) -> Result<EvalReport>;
}

/// Per-action agent energy in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCosts {
    pub move_cost: f64,
    pub sense_cost: f64,
    pub idle_per_tick: f64,
}

impl Default for EnergyCosts {
    fn default() -> Self {
        Self { move_cost: 55.0, sense_cost: 10.0, idle_per_tick: 5.0 }
    }
}

/// Weights of the non-goal cost terms in the shaping loss.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostWeights {
    /// Weight of mission steps normalized by the state count.
    pub steps: f64,
    /// Weight of agent energy normalized by `energy_budget`.
    pub energy: f64,
    pub energy_budget: f64,
}

/// Training, retraining and runtime context splits.
#[derive(Debug, Clone, Default)]
pub struct ContextSplits {
    pub training: Vec<ExecutionContext>,
    pub retrain: Vec<ExecutionContext>,
    pub runtime: Vec<ExecutionContext>,
}

#[derive(Clone)]
pub struct FleetSpec<T> {
    pub n_agents: usize,
    pub contexts: ContextSplits,
    /// Action set of each agent; movement outside these is never chosen by
    /// the policy (travel between groups is handled by the action driver).
    pub actions: Vec<Vec<ActionId>>,
    pub map_fn: Arc<dyn MapFn<T>>,
    pub eval_fn: Arc<dyn EvalFn<T>>,
    pub tiling: Tiling,
    pub learning: LearningParams<T>,
    pub goals: Goals,
    pub costs: CostWeights,
    pub energy: EnergyCosts,
}

impl<T> fmt::Debug for FleetSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FleetSpec")
            .field("n_agents", &self.n_agents)
            .field("tiling", &self.tiling)
            .field("goals", &self.goals)
            .finish_non_exhaustive()
    }
}

impl<T: Real> FleetSpec<T> {
    /// A spec with every agent allowed all five actions, default tiling,
    /// learning parameters, energy table and no cost terms.
    pub fn new(n_agents: usize, map_fn: Arc<dyn MapFn<T>>, eval_fn: Arc<dyn EvalFn<T>>, goals: Goals) -> Self {
        Self {
            n_agents,
            contexts: ContextSplits::default(),
            actions: vec![ActionId::ALL.to_vec(); n_agents],
            map_fn,
            eval_fn,
            tiling: Tiling::default(),
            learning: LearningParams::default(),
            goals,
            costs: CostWeights::default(),
            energy: EnergyCosts::default(),
        }
    }

    pub fn with_agents(mut self, n_agents: usize) -> Self {
        self.n_agents = n_agents;
        self.actions = vec![ActionId::ALL.to_vec(); n_agents];
        self
    }

    pub fn n_features(&self) -> usize {
        self.map_fn.n_features()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 {
            return Err(contract("a fleet needs at least one agent"));
        }
        if self.actions.len() != self.n_agents {
            return Err(contract(format!("{} action sets for {} agents", self.actions.len(), self.n_agents)));
        }
        // Sensing in place is the one action valid in every cell.
        if let Some(a) = self.actions.iter().position(|a| !a.contains(&ActionId::SenseHold)) {
            return Err(contract(format!("agent {a} action set lacks SenseHold")));
        }
        if self.tiling.tile_width == 0 || self.tiling.tile_height == 0 {
            return Err(contract("tiling must produce non-empty groups"));
        }
        self.learning.validate()?;
        self.goals.validate_against(&self.eval_fn.metrics())?;
        Ok(())
    }
}
