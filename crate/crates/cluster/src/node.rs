use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::replica::FragmentId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerState {
    On,
    Off,
    /// Accepts no new placements; powers off once its tasks finish and its
    /// fragments are live elsewhere.
    Draining,
    /// Wake-on-LAN issued; accepts placements once `remaining` reaches zero.
    Waking { remaining: u32 },
}

impl PowerState {
    /// Whether the node's disks are reachable.
    pub fn is_live(self) -> bool {
        matches!(self, PowerState::On | PowerState::Draining)
    }

    pub fn label(self) -> &'static str {
        match self {
            PowerState::On => "on",
            PowerState::Off => "off",
            PowerState::Draining => "draining",
            PowerState::Waking { .. } => "waking",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub cpu_capacity: f64,
    pub mem_capacity: f64,
    pub power: PowerState,
    pub fragments: BTreeSet<FragmentId>,
    pub is_hub: bool,
    pub active_watts: f64,
    pub idle_watts: f64,
}

impl Node {
    pub fn new(id: u32, cpu_capacity: f64, mem_capacity: f64) -> Self {
        assert!(cpu_capacity > 0.0 && mem_capacity > 0.0, "node capacities must be positive");
        Self {
            id: NodeId(id),
            cpu_capacity,
            mem_capacity,
            power: PowerState::On,
            fragments: BTreeSet::new(),
            is_hub: false,
            active_watts: 50.0,
            idle_watts: 20.0,
        }
    }

    pub fn hub(mut self) -> Self {
        self.is_hub = true;
        self
    }

    pub fn with_watts(mut self, active: f64, idle: f64) -> Self {
        self.active_watts = active;
        self.idle_watts = idle;
        self
    }

    pub fn powered_off(mut self) -> Self {
        self.power = PowerState::Off;
        self
    }

    /// On and not draining: eligible for new placements and counted in CPU_t.
    pub fn schedulable(&self) -> bool {
        self.power == PowerState::On
    }
}
