use fleet_cluster::{
    Autoscaler, ClusterConfig, ClusterState, EdgeRuntime, FragmentId, Node, Task, Watermarks,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Shape of the simulated edge cluster attached to missions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EdgeConfig {
    /// Worker nodes besides the hub.
    pub workers: usize,
    pub worker_cpu: f64,
    pub hub_cpu: f64,
    pub active_watts: f64,
    pub idle_watts: f64,
    pub autoscale: bool,
    pub watermarks: Watermarks,
    pub cluster: ClusterConfig,
    /// Work units of the sensor container run per sensing event.
    pub sensor_work: f64,
    /// Work units of a retrain task per replayed transition.
    pub retrain_work_per_transition: f64,
    /// Safety cap on ticks spent draining work after a mission.
    pub max_drain_ticks: u64,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self {
            workers: 5,
            worker_cpu: 4.0,
            hub_cpu: 8.0,
            active_watts: 50.0,
            idle_watts: 20.0,
            autoscale: true,
            watermarks: Watermarks::default(),
            cluster: ClusterConfig::default(),
            sensor_work: 0.5,
            retrain_work_per_transition: 0.05,
            max_drain_ticks: 10_000,
        }
    }
}

impl EdgeConfig {
    pub fn build(&self) -> EdgeRuntime {
        let mut nodes = vec![Node::new(0, self.hub_cpu, self.hub_cpu).hub().with_watts(self.active_watts, self.idle_watts)];
        for i in 0..self.workers {
            nodes.push(Node::new(i as u32 + 1, self.worker_cpu, self.worker_cpu).with_watts(self.active_watts, self.idle_watts));
        }
        let scaler = self.autoscale.then(|| Autoscaler::new(self.watermarks));
        EdgeRuntime::new(ClusterState::new(nodes, self.cluster), scaler)
    }
}

/// Fragment holding one agent's data from one mission.
pub fn mission_fragment(mission: usize, agent: usize) -> FragmentId {
    FragmentId(((mission as u64) << 16) | agent as u64)
}

pub(crate) fn submit_sensor(rt: &mut EdgeRuntime, config: &EdgeConfig, mission: usize, agent: usize) {
    rt.submit(Task::sensor(format!("sensor-a{agent}"), config.sensor_work, Some(mission_fragment(mission, agent))));
}

/// Queues one retrain task per aggregation; returns the submitted ids in order.
pub fn submit_retraining(
    rt: &mut EdgeRuntime,
    config: &EdgeConfig,
    mission: usize,
    jobs: &[(Vec<usize>, f64, usize)],
) -> Result<Vec<fleet_cluster::TaskId>> {
    let mut ids = Vec::with_capacity(jobs.len());
    for (subset, usefulness, transitions) in jobs {
        let label = format!("{{{}}}", subset.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(","));
        let fragments = subset.iter().map(|&a| mission_fragment(mission, a));
        let work = (config.retrain_work_per_transition * *transitions as f64).max(config.retrain_work_per_transition);
        ids.push(rt.submit(Task::retrain(label, usefulness.clamp(0.0, 1.0), fragments, work)?));
    }
    Ok(ids)
}
