//! Discrete-time simulation of an edge cluster that retrains swarm models.
//!
//! Retraining tasks carry a usefulness score that maps onto one of ten
//! coarse priority levels. Levels drive both admission order and the share
//! of cluster CPU/memory each task may use. Sensor tasks sit above every
//! retraining level. Nodes hold replicated data fragments; the autoscaler
//! powers idle nodes down only once every fragment they hold is live
//! somewhere else.

pub mod autoscaler;
pub mod cluster;
pub mod energy;
pub mod error;
pub mod node;
pub mod replica;
pub mod task;
pub mod trace;

pub use autoscaler::{Autoscaler, ScaleAction, Watermarks};
pub use cluster::{ClusterConfig, ClusterState, Event, EdgeRuntime};
pub use energy::EnergyLedger;
pub use error::ClusterError;
pub use node::{Node, NodeId, PowerState};
pub use replica::{FragmentId, ReplicaStore, Replication};
pub use task::{
    apportion, priority, priority_level, Allocation, Task, TaskId, TaskKind, TaskState,
    PRIORITY_STEP, SENSOR_PRIORITY,
};
