use serde::{Deserialize, Serialize};

use crate::cluster::ClusterState;
use crate::node::{NodeId, PowerState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Watermarks {
    pub low: f64,
    pub high: f64,
    /// Consecutive low-utilization ticks before a drain is issued.
    pub patience: u32,
}

impl Default for Watermarks {
    fn default() -> Self {
        Self { low: 0.25, high: 0.85, patience: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleAction {
    Wake(NodeId),
    Drain(NodeId),
    None,
}

/// Duty-cycling controller with hysteresis between two utilization marks.
#[derive(Debug, Clone, PartialEq)]
pub struct Autoscaler {
    pub watermarks: Watermarks,
    low_streak: u32,
}

impl Autoscaler {
    pub fn new(watermarks: Watermarks) -> Self {
        assert!(
            0.0 <= watermarks.low && watermarks.low < watermarks.high && watermarks.high <= 1.0,
            "watermarks must satisfy 0 <= low < high <= 1"
        );
        Self { watermarks, low_streak: 0 }
    }

    pub fn utilization(cluster: &ClusterState) -> f64 {
        let total = cluster.cpu_total();
        if total <= 0.0 {
            return if cluster.pending_work() > 0.0 { f64::INFINITY } else { 0.0 };
        }
        cluster.allocated_cpu() / total
    }

    pub fn scale_decision(&mut self, cluster: &ClusterState) -> ScaleAction {
        let util = Self::utilization(cluster);
        let blocked = cluster.pending_schedulable().next().is_some();
        if util > self.watermarks.high || blocked {
            self.low_streak = 0;
            let waking = cluster.nodes.iter().any(|n| matches!(n.power, PowerState::Waking { .. }));
            if waking {
                return ScaleAction::None;
            }
            return cluster
                .nodes
                .iter()
                .find(|n| n.power == PowerState::Off)
                .map_or(ScaleAction::None, |n| ScaleAction::Wake(n.id));
        }
        if util >= self.watermarks.low {
            self.low_streak = 0;
            return ScaleAction::None;
        }
        self.low_streak += 1;
        if self.low_streak < self.watermarks.patience {
            return ScaleAction::None;
        }
        // One decommission at a time, and only once data lost to the previous
        // one is back at the replication target.
        let busy = cluster.nodes.iter().any(|n| n.power == PowerState::Draining) || cluster.recovering();
        let on = cluster.nodes.iter().filter(|n| n.schedulable()).count();
        if busy || on < 2 {
            return ScaleAction::None;
        }
        let victim = cluster
            .nodes
            .iter()
            .filter(|n| n.schedulable() && !n.is_hub)
            .min_by_key(|n| (cluster.running_on(n.id).count(), std::cmp::Reverse(n.id)))
            .map(|n| n.id);
        match victim {
            Some(id) => {
                self.low_streak = 0;
                ScaleAction::Drain(id)
            }
            None => ScaleAction::None,
        }
    }
}
