use fleet_cluster::EdgeRuntime;
use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::{contract, Result};
use crate::features::FeatureSpace;
use crate::fleetspec::{FleetSpec, Perf};
use crate::goals::{metric, EvalReport};
use crate::grid::StateId;
use crate::mission::agent::{step_agent, AgentRuntime, StepEnv};
use crate::mission::edge::{submit_sensor, EdgeConfig};
use crate::mission::partition::partition_states;
use crate::mission::trace::MissionTrace;
use crate::models::{ModelEnsemble, QTable, RewardSpec};
use crate::scalar::Real;
use crate::seeds::rng_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissionMode {
    /// Gate-driven termination.
    Fleet,
    /// No gating; stops as soon as Eval reports every goal met.
    Classic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionOptions {
    pub mode: MissionMode,
    /// Zero-based index within a campaign; drives exploration decay and
    /// fragment naming.
    pub mission_index: usize,
    /// Overrides the exploration schedule.
    pub epsilon: Option<f64>,
}

impl Default for MissionOptions {
    fn default() -> Self {
        Self { mode: MissionMode::Fleet, mission_index: 0, epsilon: None }
    }
}

impl MissionOptions {
    pub fn greedy() -> Self {
        Self { epsilon: Some(0.0), ..Self::default() }
    }
}

/// A cluster observing the mission: every sensing event runs a sensor task.
pub struct EdgeHook<'a> {
    pub runtime: &'a mut EdgeRuntime,
    pub config: &'a EdgeConfig,
}

#[derive(Debug, Clone)]
pub struct MissionOutcome<T> {
    pub report: EvalReport,
    pub trace: MissionTrace<T>,
    /// Per-agent working tables after this mission's backups.
    pub tables: Vec<QTable<T>>,
    pub visited: Vec<Vec<StateId>>,
}

fn merged_features<T: Real>(agents: &[AgentRuntime<T>]) -> Result<FeatureSpace<T>> {
    let mut fs = FeatureSpace::default();
    for a in agents {
        for v in a.feature_vectors() {
            fs.push(v.clone())?;
        }
    }
    Ok(fs)
}

fn ensemble_for<T>(models: &[ModelEnsemble<T>], agent: usize) -> &ModelEnsemble<T> {
    if models.len() == 1 {
        &models[0]
    } else {
        &models[agent]
    }
}

/// Runs one mission over `ctx`. Agents step round-robin in a global tick
/// loop; `models` holds one ensemble per agent or a single shared one.
pub fn run_mission<T: Real>(
    fleet: &FleetSpec<T>,
    ctx: &ExecutionContext,
    models: &[ModelEnsemble<T>],
    spec: &RewardSpec<T>,
    opts: &MissionOptions,
    mut edge: Option<EdgeHook<'_>>,
    seed: u64,
) -> Result<MissionOutcome<T>> {
    fleet.validate()?;
    if models.len() != 1 && models.len() != fleet.n_agents {
        return Err(contract(format!("{} ensembles for {} agents", models.len(), fleet.n_agents)));
    }
    if spec.weights.len() != fleet.n_features() {
        return Err(contract(format!("{} reward weights for {} features", spec.weights.len(), fleet.n_features())));
    }
    spec.validate()?;
    let dims = ctx.dims();
    let bands = partition_states(dims, fleet.tiling, fleet.n_agents)?;
    let epsilon = opts.epsilon.unwrap_or_else(|| fleet.learning.epsilon_for_mission(opts.mission_index).as_f64());
    let mut agents: Vec<AgentRuntime<T>> = bands
        .into_iter()
        .enumerate()
        .map(|(i, groups)| {
            let base = ensemble_for(models, i).models()[0].clone();
            AgentRuntime::new(i, groups, dims, fleet.tiling, base, epsilon, fleet.actions[i].clone())
        })
        .collect();
    let mut rngs: Vec<_> = (0..fleet.n_agents).map(|i| rng_for(seed, i as u64)).collect();
    let env = StepEnv {
        ctx,
        map_fn: fleet.map_fn.as_ref(),
        tiling: fleet.tiling,
        params: &fleet.learning,
        energy: &fleet.energy,
        spec,
        gating: opts.mode == MissionMode::Fleet,
    };
    let (edge_start_energy, edge_start_tick) =
        edge.as_ref().map(|h| (h.runtime.ledger.total, h.runtime.cluster.tick)).unwrap_or((0.0, 0));

    let mut trace = MissionTrace::default();
    let mut tick: u64 = 0;
    let mut stopped_at: Option<u64> = None;
    while agents.iter().any(|a| !a.is_finished()) {
        let mut sensed = false;
        for agent in agents.iter_mut() {
            if agent.is_finished() || agent.ready_at > tick {
                continue;
            }
            let i = agent.index;
            let t = step_agent(agent, &env, ensemble_for(models, i), tick, &mut rngs[i])?;
            trace.transitions.push(t);
            sensed = true;
            if let Some(h) = edge.as_mut() {
                submit_sensor(h.runtime, h.config, opts.mission_index, i);
            }
        }
        if let Some(h) = edge.as_mut() {
            h.runtime.step();
        }
        tick += 1;
        if opts.mode == MissionMode::Classic && sensed {
            let fs = merged_features(&agents)?;
            let probe = fleet.eval_fn.eval(ctx, &fs, &Perf { steps: tick, ..Perf::default() })?;
            if fleet.goals.all_met(&probe)? {
                stopped_at = Some(tick);
                break;
            }
        }
    }

    let steps = stopped_at.unwrap_or_else(|| agents.iter().filter_map(|a| a.finished_at).max().unwrap_or(0));
    let mut agent_energy = 0.0;
    for a in &agents {
        let active = a.finished_at.unwrap_or(steps).min(steps);
        agent_energy += a.energy + (steps - active) as f64 * fleet.energy.idle_per_tick;
    }
    let mut completion = None;
    let mut edge_energy = 0.0;
    if let Some(h) = edge.as_mut() {
        h.runtime.run_until_idle(h.config.max_drain_ticks);
        completion = Some(h.runtime.cluster.tick - edge_start_tick);
        edge_energy = h.runtime.ledger.total - edge_start_energy;
    }
    let perf = Perf { steps, agent_energy, edge_energy, groups_done: agents.iter().all(|a| a.is_finished()) };
    let fs = merged_features(&agents)?;
    let mut report = fleet.eval_fn.eval(ctx, &fs, &perf)?;
    if let Some(c) = completion {
        report.set(metric::COMPLETION, c as f64);
    }
    fleet.goals.all_met(&report)?;
    trace.report = report.clone();
    Ok(MissionOutcome {
        report,
        trace,
        visited: agents.iter().map(|a| a.visited.iter().copied().collect()).collect(),
        tables: agents.into_iter().map(|a| a.table).collect(),
    })
}
