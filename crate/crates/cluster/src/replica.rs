use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::node::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FragmentId(pub u64);

impl fmt::Display for FragmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub fragment: FragmentId,
    pub source: NodeId,
    pub destination: NodeId,
    pub remaining: u32,
}

/// Fragment placement. Holder sets include powered-off nodes: their disks
/// keep the data, it just is not reachable until they wake.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaStore {
    holders: BTreeMap<FragmentId, BTreeSet<NodeId>>,
    in_flight: Vec<Replication>,
    pub target: usize,
}

impl Default for ReplicaStore {
    fn default() -> Self {
        Self { holders: BTreeMap::new(), in_flight: Vec::new(), target: 2 }
    }
}

impl ReplicaStore {
    pub fn add_holder(&mut self, fragment: FragmentId, node: NodeId) -> bool {
        self.holders.entry(fragment).or_default().insert(node)
    }

    pub fn holders(&self, fragment: FragmentId) -> impl Iterator<Item = NodeId> + '_ {
        self.holders.get(&fragment).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn fragments(&self) -> impl Iterator<Item = FragmentId> + '_ {
        self.holders.keys().copied()
    }

    pub fn contains(&self, fragment: FragmentId) -> bool {
        self.holders.contains_key(&fragment)
    }

    pub fn in_flight(&self) -> &[Replication] {
        &self.in_flight
    }

    pub fn is_replicating(&self, fragment: FragmentId) -> bool {
        self.in_flight.iter().any(|r| r.fragment == fragment)
    }

    pub fn schedule(&mut self, replication: Replication) {
        self.in_flight.push(replication);
    }

    /// Advances in-flight copies by one tick and returns those that landed.
    /// Copies whose endpoints are no longer live (per `live`) are cancelled.
    pub fn advance(&mut self, live: impl Fn(NodeId) -> bool) -> Vec<Replication> {
        let mut landed = Vec::new();
        let mut still = Vec::with_capacity(self.in_flight.len());
        for mut rep in self.in_flight.drain(..) {
            if !live(rep.source) || !live(rep.destination) {
                continue;
            }
            rep.remaining = rep.remaining.saturating_sub(1);
            if rep.remaining == 0 {
                landed.push(rep);
            } else {
                still.push(rep);
            }
        }
        self.in_flight = still;
        for rep in &landed {
            self.add_holder(rep.fragment, rep.destination);
        }
        landed
    }
}
