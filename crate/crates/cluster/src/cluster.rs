use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::autoscaler::{Autoscaler, ScaleAction};
use crate::energy::EnergyLedger;
use crate::error::ClusterError;
use crate::node::{Node, NodeId, PowerState};
use crate::replica::{FragmentId, ReplicaStore, Replication};
use crate::task::{apportion, Task, TaskId, TaskKind, TaskState};
use crate::trace::{EnergyRow, SchedulerRow};

const DONE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Ticks to copy one fragment between nodes.
    pub replication_ticks: u32,
    /// Ticks between a wake request and the node accepting placements.
    pub wake_ticks: u32,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self { replication_ticks: 2, wake_ticks: 3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Placed { task: TaskId, node: NodeId },
    Completed { task: TaskId, node: NodeId },
    Dropped { task: TaskId },
    Replicated { fragment: FragmentId, node: NodeId },
    PoweredOn(NodeId),
    PoweredOff(NodeId),
    DrainAborted(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub nodes: Vec<Node>,
    pub tasks: Vec<Task>,
    pub replicas: ReplicaStore,
    pub tick: u64,
    pub config: ClusterConfig,
    /// Running-task count per node during the most recent tick.
    last_busy: BTreeMap<NodeId, usize>,
}

impl ClusterState {
    pub fn new(mut nodes: Vec<Node>, config: ClusterConfig) -> Self {
        nodes.sort_by_key(|n| n.id);
        Self {
            nodes,
            tasks: Vec::new(),
            replicas: ReplicaStore::default(),
            tick: 0,
            config,
            last_busy: BTreeMap::new(),
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn node_index(&self, id: NodeId) -> Result<usize, ClusterError> {
        self.nodes.iter().position(|n| n.id == id).ok_or(ClusterError::UnknownNode(id))
    }

    pub fn task(&self, id: TaskId) -> Option<&Task> {
        self.tasks.get(id.0 as usize)
    }

    fn is_live(&self, id: NodeId) -> bool {
        self.node(id).is_some_and(|n| n.power.is_live())
    }

    /// CPU_t: capacity of nodes that are on and not draining.
    pub fn cpu_total(&self) -> f64 {
        self.nodes.iter().filter(|n| n.schedulable()).map(|n| n.cpu_capacity).sum()
    }

    pub fn mem_total(&self) -> f64 {
        self.nodes.iter().filter(|n| n.schedulable()).map(|n| n.mem_capacity).sum()
    }

    pub fn allocated_cpu(&self) -> f64 {
        self.tasks
            .iter()
            .filter(|t| t.state == TaskState::Running)
            .filter(|t| t.node.and_then(|id| self.node(id)).is_some_and(|n| n.schedulable()))
            .map(|t| t.cpu)
            .sum()
    }

    pub fn running_on(&self, node: NodeId) -> impl Iterator<Item = &Task> + '_ {
        self.tasks
            .iter()
            .filter(move |t| t.state == TaskState::Running && t.node == Some(node))
    }

    pub fn busy_during_last_tick(&self, node: NodeId) -> usize {
        self.last_busy.get(&node).copied().unwrap_or(0)
    }

    fn requested_on(&self, node: NodeId) -> f64 {
        self.running_on(node).map(|t| t.request).sum()
    }

    /// Capacity not yet claimed by admitted tasks' requests.
    pub fn free_cpu(&self, node: NodeId) -> f64 {
        self.node(node).map_or(0.0, |n| n.cpu_capacity - self.requested_on(node))
    }

    fn free_map(&self) -> BTreeMap<NodeId, f64> {
        let mut free: BTreeMap<NodeId, f64> = self.nodes.iter().map(|n| (n.id, n.cpu_capacity)).collect();
        for t in self.tasks.iter().filter(|t| t.state == TaskState::Running) {
            if let Some(v) = t.node.and_then(|n| free.get_mut(&n)) {
                *v -= t.request;
            }
        }
        free
    }

    pub fn submit(&mut self, mut task: Task) -> TaskId {
        let id = TaskId(self.tasks.len() as u64);
        task.id = id;
        task.arrival = self.tick;
        task.state = TaskState::Pending;
        self.tasks.push(task);
        id
    }

    /// Registers an existing fragment on the given holders.
    pub fn seed_fragment(&mut self, fragment: FragmentId, holders: &[NodeId]) -> Result<(), ClusterError> {
        for &h in holders {
            let idx = self.node_index(h)?;
            self.nodes[idx].fragments.insert(fragment);
            self.replicas.add_holder(fragment, h);
        }
        Ok(())
    }

    pub fn live_holders(&self, fragment: FragmentId) -> usize {
        self.replicas.holders(fragment).filter(|&h| self.is_live(h)).count()
    }

    /// Some fragment lost a live copy to a powered-off node and has not yet
    /// been re-replicated back to the target.
    pub fn recovering(&self) -> bool {
        self.replicas.fragments().any(|f| {
            self.live_holders(f) < self.replicas.target
                && self.replicas.holders(f).any(|h| self.node(h).is_some_and(|n| n.power == PowerState::Off))
        })
    }

    pub fn pending_count(&self) -> usize {
        self.tasks.iter().filter(|t| t.state == TaskState::Pending).count()
    }

    /// Pending tasks that would run if capacity existed (sensor or level > 0).
    pub fn pending_schedulable(&self) -> impl Iterator<Item = &Task> + '_ {
        self.tasks
            .iter()
            .filter(|t| t.state == TaskState::Pending && (t.kind == TaskKind::Sensor || t.level() > 0))
    }

    pub fn pending_work(&self) -> f64 {
        self.pending_schedulable().map(|t| t.remaining).sum()
    }

    pub fn is_idle(&self) -> bool {
        self.tasks.iter().all(|t| {
            t.is_finished() || (t.state == TaskState::Pending && t.kind == TaskKind::Retrain && t.level() == 0)
        })
    }

    /// Locality candidates for a task in placement preference order:
    /// largest fragment overlap, then most free CPU, then lowest node id.
    fn ranked_candidates(&self, task: &Task, free: &BTreeMap<NodeId, f64>) -> Vec<NodeId> {
        let mut cands: Vec<(usize, f64, NodeId)> = self
            .nodes
            .iter()
            .filter(|n| n.schedulable())
            .filter_map(|n| {
                let overlap = task.fragments.iter().filter(|f| n.fragments.contains(f)).count();
                let eligible = match task.kind {
                    TaskKind::Sensor => true,
                    TaskKind::Retrain => overlap > 0 || n.is_hub,
                };
                eligible.then(|| (overlap, free.get(&n.id).copied().unwrap_or(0.0), n.id))
            })
            .collect();
        cands.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then(b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal))
                .then(a.2.cmp(&b.2))
        });
        cands.into_iter().map(|c| c.2).collect()
    }

    /// Chooses the node for a pending task by the data-locality rule,
    /// ignoring whether the node currently has room for it.
    pub fn place(&self, task: TaskId) -> Result<NodeId, ClusterError> {
        let t = self.task(task).ok_or(ClusterError::UnknownTask(task))?;
        self.ranked_candidates(t, &self.free_map()).into_iter().next().ok_or(ClusterError::NoCandidate(task))
    }

    pub fn wake(&mut self, node: NodeId) -> Result<(), ClusterError> {
        let idx = self.node_index(node)?;
        if self.nodes[idx].power != PowerState::Off {
            return Err(ClusterError::NotOff(node));
        }
        self.nodes[idx].power = if self.config.wake_ticks == 0 {
            PowerState::On
        } else {
            PowerState::Waking { remaining: self.config.wake_ticks }
        };
        Ok(())
    }

    pub fn begin_drain(&mut self, node: NodeId) -> Result<(), ClusterError> {
        let idx = self.node_index(node)?;
        if self.nodes[idx].power != PowerState::On {
            return Err(ClusterError::DrainRefused(node, "node is not on"));
        }
        let others_on = self.nodes.iter().filter(|n| n.id != node && n.schedulable()).count();
        if others_on == 0 {
            return Err(ClusterError::DrainRefused(node, "last powered-on node"));
        }
        self.nodes[idx].power = PowerState::Draining;
        Ok(())
    }

    /// Marks every still-pending task as dropped (end of a mission window).
    pub fn close_out(&mut self) -> Vec<Event> {
        let mut events = Vec::new();
        for t in self.tasks.iter_mut().filter(|t| t.state == TaskState::Pending) {
            t.state = TaskState::Dropped;
            events.push(Event::Dropped { task: t.id });
        }
        events
    }

    /// Advances the cluster by one tick. Deterministic in the current state.
    pub fn tick(&mut self) -> Vec<Event> {
        let mut events = Vec::new();
        self.advance_power(&mut events);
        self.advance_replication(&mut events);
        self.admit(&mut events);
        self.assign_caps();
        self.execute(&mut events);
        for t in self.tasks.iter_mut().filter(|t| !t.is_finished()) {
            t.lifetime += 1;
            if t.state == TaskState::Pending {
                t.wait += 1;
            }
        }
        self.maintain_replicas(&mut events);
        self.advance_drains(&mut events);
        self.tick += 1;
        events
    }

    fn advance_power(&mut self, events: &mut Vec<Event>) {
        for n in &mut self.nodes {
            if let PowerState::Waking { remaining } = n.power {
                if remaining <= 1 {
                    n.power = PowerState::On;
                    events.push(Event::PoweredOn(n.id));
                } else {
                    n.power = PowerState::Waking { remaining: remaining - 1 };
                }
            }
        }
    }

    fn advance_replication(&mut self, events: &mut Vec<Event>) {
        let live: BTreeMap<NodeId, bool> = self.nodes.iter().map(|n| (n.id, n.power.is_live())).collect();
        let landed = self.replicas.advance(|id| live.get(&id).copied().unwrap_or(false));
        for rep in landed {
            if let Ok(idx) = self.node_index(rep.destination) {
                self.nodes[idx].fragments.insert(rep.fragment);
            }
            events.push(Event::Replicated { fragment: rep.fragment, node: rep.destination });
        }
    }

    fn admit(&mut self, events: &mut Vec<Event>) {
        let mut order: Vec<usize> = self
            .tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.state == TaskState::Pending)
            .filter(|(_, t)| t.kind == TaskKind::Sensor || t.level() > 0)
            .map(|(i, _)| i)
            .collect();
        order.sort_by(|&a, &b| {
            let (ta, tb) = (&self.tasks[a], &self.tasks[b]);
            tb.priority
                .cmp(&ta.priority)
                .then(ta.arrival.cmp(&tb.arrival))
                .then(ta.id.cmp(&tb.id))
        });
        let mut free = self.free_map();
        for i in order {
            if !free.iter().any(|(id, &f)| f + DONE_EPS >= self.tasks[i].request && self.node(*id).is_some_and(|n| n.schedulable())) {
                continue;
            }
            let chosen = {
                let task = &self.tasks[i];
                self.ranked_candidates(task, &free)
                    .into_iter()
                    .find(|n| free[n] + DONE_EPS >= task.request)
            };
            if let Some(node) = chosen {
                *free.get_mut(&node).expect("candidate is a node") -= self.tasks[i].request;
                let t = &mut self.tasks[i];
                t.state = TaskState::Running;
                t.node = Some(node);
                events.push(Event::Placed { task: t.id, node });
            }
        }
    }

    fn assign_caps(&mut self) {
        let (cpu_t, mem_t) = (self.cpu_total(), self.mem_total());
        let mut sensor_cpu = 0.0;
        for t in self.tasks.iter_mut().filter(|t| t.kind == TaskKind::Sensor) {
            if t.state == TaskState::Running {
                t.cpu = t.request;
                t.mem = t.request;
                sensor_cpu += t.request;
            } else {
                t.cpu = 0.0;
                t.mem = 0.0;
            }
        }
        let claimants: Vec<usize> = self
            .tasks
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kind == TaskKind::Retrain)
            .filter(|(_, t)| t.state == TaskState::Running || (t.state == TaskState::Pending && t.level() > 0))
            .map(|(i, _)| i)
            .collect();
        let priorities: Vec<u64> = claimants.iter().map(|&i| self.tasks[i].priority).collect();
        let caps = apportion(&priorities, (cpu_t - sensor_cpu).max(0.0), (mem_t - sensor_cpu).max(0.0));
        for (&i, cap) in claimants.iter().zip(caps) {
            let t = &mut self.tasks[i];
            if t.state == TaskState::Running {
                t.cpu = cap.cpu;
                t.mem = cap.mem;
            } else {
                t.cpu = 0.0;
                t.mem = 0.0;
            }
        }
        // A node never hands out more than it has; retrain caps shrink to fit.
        for n in &self.nodes {
            let (mut fixed, mut flexible) = (0.0, 0.0);
            for t in self.tasks.iter().filter(|t| t.state == TaskState::Running && t.node == Some(n.id)) {
                match t.kind {
                    TaskKind::Sensor => fixed += t.cpu,
                    TaskKind::Retrain => flexible += t.cpu,
                }
            }
            let room = (n.cpu_capacity - fixed).max(0.0);
            if flexible > room && flexible > 0.0 {
                let scale = room / flexible;
                for t in self.tasks.iter_mut().filter(|t| {
                    t.state == TaskState::Running && t.node == Some(n.id) && t.kind == TaskKind::Retrain
                }) {
                    t.cpu *= scale;
                    t.mem *= scale;
                }
            }
        }
    }

    fn execute(&mut self, events: &mut Vec<Event>) {
        self.last_busy.clear();
        let mut produced = Vec::new();
        for t in self.tasks.iter_mut().filter(|t| t.state == TaskState::Running) {
            let node = t.node.expect("running task has a node");
            *self.last_busy.entry(node).or_default() += 1;
            t.remaining -= t.cpu;
            if t.remaining <= DONE_EPS {
                t.remaining = 0.0;
                t.state = TaskState::Done;
                events.push(Event::Completed { task: t.id, node });
                if let Some(f) = t.produces {
                    produced.push((f, node));
                }
            }
        }
        for (f, node) in produced {
            if self.replicas.add_holder(f, node) {
                if let Ok(idx) = self.node_index(node) {
                    self.nodes[idx].fragments.insert(f);
                }
            }
        }
    }

    /// Schedules copies so every fragment heads towards the replication
    /// target, and so fragments on a draining node gain a holder that stays on.
    fn maintain_replicas(&mut self, events: &mut Vec<Event>) {
        let draining: Vec<NodeId> =
            self.nodes.iter().filter(|n| n.power == PowerState::Draining).map(|n| n.id).collect();
        let fragments: Vec<FragmentId> = self.replicas.fragments().collect();
        let mut planned: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut abort = Vec::new();
        for f in fragments {
            if self.replicas.is_replicating(f) {
                continue;
            }
            let holders: Vec<NodeId> = self.replicas.holders(f).collect();
            let stable = holders
                .iter()
                .filter(|&&h| self.node(h).is_some_and(|n| n.schedulable()))
                .count();
            let live = holders.iter().filter(|&&h| self.is_live(h)).count();
            let on_draining = holders.iter().find(|h| draining.contains(h)).copied();
            let needs_evacuation = on_draining.is_some() && stable == 0;
            if live >= self.replicas.target && !needs_evacuation {
                continue;
            }
            let Some(source) = holders.iter().copied().find(|&h| self.is_live(h)) else {
                continue;
            };
            let dest = self
                .nodes
                .iter()
                .filter(|n| n.schedulable() && !holders.contains(&n.id))
                .min_by_key(|n| (n.fragments.len() + planned.get(&n.id).copied().unwrap_or(0), n.id))
                .map(|n| n.id);
            match dest {
                Some(destination) => {
                    *planned.entry(destination).or_default() += 1;
                    self.replicas.schedule(Replication {
                        fragment: f,
                        source,
                        destination,
                        remaining: self.config.replication_ticks.max(1),
                    });
                }
                None if needs_evacuation => abort.extend(on_draining),
                None => {}
            }
        }
        abort.sort();
        abort.dedup();
        for id in abort {
            if let Ok(idx) = self.node_index(id) {
                self.nodes[idx].power = PowerState::On;
                events.push(Event::DrainAborted(id));
            }
        }
    }

    fn advance_drains(&mut self, events: &mut Vec<Event>) {
        let draining: Vec<NodeId> =
            self.nodes.iter().filter(|n| n.power == PowerState::Draining).map(|n| n.id).collect();
        for id in draining {
            if self.running_on(id).next().is_some() {
                continue;
            }
            let node = self.node(id).expect("draining node exists");
            let safe = node.fragments.iter().all(|&f| {
                self.replicas
                    .holders(f)
                    .any(|h| h != id && self.node(h).is_some_and(|n| n.schedulable()))
            });
            if safe {
                let idx = self.node_index(id).expect("node exists");
                self.nodes[idx].power = PowerState::Off;
                events.push(Event::PoweredOff(id));
            }
        }
    }
}

/// A cluster plus its optional autoscaler, energy ledger and CSV traces.
#[derive(Debug, Clone)]
pub struct EdgeRuntime {
    pub cluster: ClusterState,
    pub autoscaler: Option<Autoscaler>,
    pub ledger: EnergyLedger,
    pub scheduler_trace: Vec<SchedulerRow>,
    pub energy_trace: Vec<EnergyRow>,
}

impl EdgeRuntime {
    pub fn new(cluster: ClusterState, autoscaler: Option<Autoscaler>) -> Self {
        Self {
            cluster,
            autoscaler,
            ledger: EnergyLedger::default(),
            scheduler_trace: Vec::new(),
            energy_trace: Vec::new(),
        }
    }

    pub fn submit(&mut self, task: Task) -> TaskId {
        let id = self.cluster.submit(task);
        self.record_task(id);
        id
    }

    fn record_task(&mut self, id: TaskId) {
        if let Some(t) = self.cluster.task(id) {
            self.scheduler_trace.push(SchedulerRow::from_task(self.cluster.tick, t));
        }
    }

    pub fn step(&mut self) -> Vec<Event> {
        let tick = self.cluster.tick;
        let events = self.cluster.tick();
        self.ledger.account(&self.cluster);
        for e in &events {
            let id = match e {
                Event::Placed { task, .. } | Event::Completed { task, .. } | Event::Dropped { task } => *task,
                _ => continue,
            };
            if let Some(t) = self.cluster.task(id) {
                self.scheduler_trace.push(SchedulerRow::from_task(tick, t));
            }
        }
        for n in &self.cluster.nodes {
            self.energy_trace.push(EnergyRow {
                tick,
                node_id: n.id.0,
                power_state: n.power.label().to_string(),
                running_tasks: self.cluster.busy_during_last_tick(n.id),
                watt_ticks_cum: self.ledger.node_total(n.id),
            });
        }
        if let Some(scaler) = self.autoscaler.as_mut() {
            match scaler.scale_decision(&self.cluster) {
                ScaleAction::Wake(id) => {
                    let _ = self.cluster.wake(id);
                }
                ScaleAction::Drain(id) => {
                    let _ = self.cluster.begin_drain(id);
                }
                ScaleAction::None => {}
            }
        }
        events
    }

    /// Ticks until no schedulable work remains or `max_ticks` elapse, then
    /// drops whatever is still pending. Returns the ticks taken.
    pub fn run_until_idle(&mut self, max_ticks: u64) -> u64 {
        let start = self.cluster.tick;
        while !self.cluster.is_idle() && self.cluster.tick - start < max_ticks {
            self.step();
        }
        let tick = self.cluster.tick;
        for e in self.cluster.close_out() {
            if let Event::Dropped { task } = e {
                if let Some(t) = self.cluster.task(task) {
                    self.scheduler_trace.push(SchedulerRow::from_task(tick, t));
                }
            }
        }
        self.cluster.tick - start
    }
}
