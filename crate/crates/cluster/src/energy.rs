use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterState;
use crate::node::{NodeId, PowerState};

/// Accumulated watt-ticks per node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    per_node: BTreeMap<NodeId, f64>,
    pub total: f64,
}

impl EnergyLedger {
    /// Charges one tick: active rate for nodes that ran work (or are
    /// draining/booting), idle rate for on-but-idle nodes, nothing when off.
    pub fn account(&mut self, cluster: &ClusterState) {
        for n in &cluster.nodes {
            let watts = match n.power {
                PowerState::Off => 0.0,
                PowerState::Draining | PowerState::Waking { .. } => n.active_watts,
                PowerState::On if cluster.busy_during_last_tick(n.id) > 0 => n.active_watts,
                PowerState::On => n.idle_watts,
            };
            *self.per_node.entry(n.id).or_default() += watts;
            self.total += watts;
        }
    }

    pub fn node_total(&self, node: NodeId) -> f64 {
        self.per_node.get(&node).copied().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterConfig;
    use crate::node::Node;
    use crate::task::Task;

    #[test]
    fn idle_node_accrues_idle_rate() {
        let mut c = ClusterState::new(vec![Node::new(0, 1.0, 1.0).with_watts(50.0, 20.0)], ClusterConfig::default());
        let mut ledger = EnergyLedger::default();
        for _ in 0..10 {
            c.tick();
            ledger.account(&c);
        }
        assert_eq!(ledger.total, 200.0);
    }

    #[test]
    fn off_nodes_accrue_nothing() {
        let mut c = ClusterState::new(vec![Node::new(0, 1.0, 1.0).powered_off()], ClusterConfig::default());
        let mut ledger = EnergyLedger::default();
        c.tick();
        ledger.account(&c);
        assert_eq!(ledger.total, 0.0);
    }

    #[test]
    fn mixed_active_and_idle_ticks() {
        let mut c = ClusterState::new(vec![Node::new(0, 1.0, 1.0).hub().with_watts(50.0, 20.0)], ClusterConfig::default());
        let mut ledger = EnergyLedger::default();
        c.submit(Task::sensor("s", 5.0, None));
        for _ in 0..10 {
            c.tick();
            ledger.account(&c);
        }
        assert_eq!(ledger.total, 350.0);
        assert_eq!(ledger.node_total(NodeId(0)), 350.0);
    }
}
