use thiserror::Error;

use crate::node::NodeId;
use crate::task::TaskId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("usefulness {0} is outside [0, 1]")]
    InvalidUsefulness(f64),
    #[error("no powered-on node can host task {0}")]
    NoCandidate(TaskId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("node {0} cannot be drained: {1}")]
    DrainRefused(NodeId, &'static str),
    #[error("node {0} is not powered off")]
    NotOff(NodeId),
}
