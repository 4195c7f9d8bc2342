use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::Result;
use crate::features::{FeatureSpace, StateSpaceVector};
use crate::fleetspec::{EnergyCosts, MapFn};
use crate::grid::{group_of, valid_actions, ActionId, GridDims, StateGroupId, StateId, Tiling};
use crate::models::{ensemble_select, ha_gate, q_update, reward, GateDecision, LearningParams, ModelEnsemble, QTable, RewardSpec};
use crate::scalar::Real;

/// One sensing event: the agent arrived at `to` from `from` by `action`,
/// sensed it and was rewarded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Transition<T> {
    pub agent: usize,
    pub tick: u64,
    pub from: StateId,
    pub action: ActionId,
    pub to: StateId,
    pub ssv: Vec<T>,
    pub reward: T,
    pub group: StateGroupId,
    pub gate: GateDecision,
    /// Actions the backup maximized over at `to`.
    pub valid_next: Vec<ActionId>,
}

/// Everything an agent step reads but never writes.
pub struct StepEnv<'a, T> {
    pub ctx: &'a ExecutionContext,
    pub map_fn: &'a dyn MapFn<T>,
    pub tiling: Tiling,
    pub params: &'a LearningParams<T>,
    pub energy: &'a EnergyCosts,
    pub spec: &'a RewardSpec<T>,
    /// `false` runs without the History-to-Action gate.
    pub gating: bool,
}

#[derive(Debug, Clone)]
pub struct AgentRuntime<T> {
    pub index: usize,
    pub position: StateId,
    pub groups: Vec<StateGroupId>,
    pub current: usize,
    pub group_fs: BTreeMap<StateGroupId, FeatureSpace<T>>,
    pub group_rewards: BTreeMap<StateGroupId, Vec<T>>,
    pub visited: BTreeSet<StateId>,
    /// Unvisited states of groups the agent has left, to be extrapolated.
    pub skipped: BTreeSet<StateId>,
    /// Working table receiving this mission's backups.
    pub table: QTable<T>,
    pub epsilon: f64,
    pub energy: f64,
    pub moves: u64,
    pub senses: u64,
    /// Tick at which the agent is next free to sense.
    pub ready_at: u64,
    pub finished_at: Option<u64>,
    arrival: Option<(StateId, ActionId)>,
    actions: Vec<ActionId>,
    own: Vec<bool>,
    dims: GridDims,
    tiling: Tiling,
}

impl<T: Real> AgentRuntime<T> {
    pub fn new(
        index: usize,
        groups: Vec<StateGroupId>,
        dims: GridDims,
        tiling: Tiling,
        table: QTable<T>,
        epsilon: f64,
        actions: Vec<ActionId>,
    ) -> Self {
        let mut own = vec![false; dims.n_states()];
        for g in &groups {
            for s in tiling.group_states(*g, dims) {
                own[dims.index(s)] = true;
            }
        }
        let position = groups.first().map(|g| tiling.group_states(*g, dims)[0]).unwrap_or(StateId::new(0, 0));
        Self {
            index,
            position,
            current: 0,
            finished_at: groups.is_empty().then_some(0),
            groups,
            group_fs: BTreeMap::new(),
            group_rewards: BTreeMap::new(),
            visited: BTreeSet::new(),
            skipped: BTreeSet::new(),
            table,
            epsilon,
            energy: 0.0,
            moves: 0,
            senses: 0,
            ready_at: 0,
            arrival: None,
            actions,
            own,
            dims,
            tiling,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.finished_at.is_some()
    }

    pub fn owns(&self, s: StateId) -> bool {
        self.dims.contains(s) && self.own[self.dims.index(s)]
    }

    fn allowed(&self, s: StateId) -> Vec<ActionId> {
        valid_actions(s, self.dims).into_iter().filter(|a| self.actions.contains(a)).collect()
    }

    fn nearest_unvisited(&self, group: StateGroupId, from: StateId) -> Option<StateId> {
        let mut best: Option<StateId> = None;
        for s in self.tiling.group_states(group, self.dims) {
            if !self.visited.contains(&s) && best.is_none_or(|b| from.manhattan(s) < from.manhattan(b)) {
                best = Some(s);
            }
        }
        best
    }

    /// First action and length of a shortest path through the agent's own
    /// cells, or of the rows-first Manhattan path when none exists.
    fn route(&self, from: StateId, to: StateId) -> (ActionId, u64) {
        let dims = self.dims;
        let mut dist = vec![u64::MAX; dims.n_states()];
        let mut queue = VecDeque::new();
        dist[dims.index(to)] = 0;
        queue.push_back(to);
        while let Some(s) = queue.pop_front() {
            if s == from {
                break;
            }
            let d = dist[dims.index(s)];
            for a in ActionId::ALL.into_iter().filter(|a| a.is_move()) {
                if let Some(n) = dims.apply(s, a) {
                    let i = dims.index(n);
                    if dist[i] == u64::MAX && (self.own[i] || n == from) {
                        dist[i] = d + 1;
                        queue.push_back(n);
                    }
                }
            }
        }
        let d = dist[dims.index(from)];
        if d != u64::MAX {
            for a in ActionId::ALL.into_iter().filter(|a| a.is_move()) {
                if let Some(n) = dims.apply(from, a) {
                    if dist[dims.index(n)] == d - 1 {
                        return (a, d);
                    }
                }
            }
        }
        let (a, _) = dims.step_towards(from, to).expect("route between distinct cells");
        (a, from.manhattan(to) as u64)
    }

    fn travel(&mut self, to: StateId, first: ActionId, cells: u64, tick: u64, energy: &EnergyCosts) {
        self.arrival = Some((self.position, first));
        self.position = to;
        self.moves += cells;
        self.energy += cells as f64 * energy.move_cost;
        self.ready_at = tick + cells.max(1);
    }

    /// Every sensed feature vector, in group order.
    pub fn feature_vectors(&self) -> impl Iterator<Item = &StateSpaceVector<T>> + '_ {
        self.group_fs.values().flat_map(|fs| fs.vectors().iter())
    }
}

/// Senses the current state, backs up the arriving move, consults the gate
/// and commits the next move (or finishes).
pub fn step_agent<T: Real, R: Rng + ?Sized>(
    agent: &mut AgentRuntime<T>,
    env: &StepEnv<'_, T>,
    ensemble: &ModelEnsemble<T>,
    tick: u64,
    rng: &mut R,
) -> Result<Transition<T>> {
    debug_assert!(!agent.is_finished());
    let dims = agent.dims;
    let here = agent.position;
    let group = group_of(here, dims, agent.tiling)?;
    let features = env.map_fn.map(env.ctx.sense(here))?;
    let ssv = StateSpaceVector::new(features, here, agent.index)?;
    let r = reward(&ssv.features, env.spec)?;
    let (from, action) = agent.arrival.take().unwrap_or((here, ActionId::SenseHold));
    let valid_next = agent.allowed(here);
    q_update(&mut agent.table, from, action, here, r, env.params, &valid_next);

    agent.group_fs.entry(group).or_default().push(ssv.clone())?;
    agent.group_rewards.entry(group).or_default().push(r);
    agent.visited.insert(here);
    agent.senses += 1;
    agent.energy += env.energy.sense_cost;

    let gate = if env.gating {
        ha_gate(&agent.group_fs[&group], &agent.group_rewards[&group], env.spec)
    } else {
        GateDecision::Stay
    };
    let transition = Transition {
        agent: agent.index,
        tick,
        from,
        action,
        to: here,
        ssv: ssv.features,
        reward: r,
        group,
        gate,
        valid_next: valid_next.clone(),
    };

    let remaining = agent.nearest_unvisited(group, here);
    if gate == GateDecision::Stay && remaining.is_some() {
        let moves: Vec<ActionId> = valid_next
            .iter()
            .copied()
            .filter(|a| a.is_move())
            .filter(|&a| {
                dims.apply(here, a).is_some_and(|n| !agent.visited.contains(&n) && group_of(n, dims, agent.tiling).ok() == Some(group))
            })
            .collect();
        if moves.is_empty() {
            let target = remaining.expect("checked above");
            let (first, cells) = agent.route(here, target);
            agent.travel(target, first, cells, tick, env.energy);
        } else {
            let a = ensemble_select(ensemble, here, &moves, agent.epsilon, rng)?;
            let next = dims.apply(here, a).expect("filtered to in-grid moves");
            agent.travel(next, a, 1, tick, env.energy);
        }
        return Ok(transition);
    }

    let states = agent.tiling.group_states(group, dims);
    agent.skipped.extend(states.into_iter().filter(|s| !agent.visited.contains(s)));
    loop {
        agent.current += 1;
        let Some(&next_group) = agent.groups.get(agent.current) else {
            agent.finished_at = Some(tick + 1);
            agent.ready_at = tick + 1;
            return Ok(transition);
        };
        if let Some(target) = agent.nearest_unvisited(next_group, here) {
            let (first, cells) = agent.route(here, target);
            agent.travel(target, first, cells, tick, env.energy);
            return Ok(transition);
        }
    }
}
