use thiserror::Error;

use fleet_cluster::ClusterError;

pub type Result<T, E = FleetError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FleetError {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("report is missing metric `{0}`")]
    MissingMetric(String),
    #[error("no mission trace for agent {0}")]
    MissingTrace(usize),
    #[error("powerset aggregation needs N <= 8 agents, got {0}; use per-agent aggregation or a custom heuristic")]
    TooManyAgents(usize),
    #[error("gaussian process needs at least one observation")]
    NoObservations,
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("cannot extrapolate without visited states")]
    NothingVisited,
    #[error("unknown camera {0}")]
    UnknownCamera(usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

pub(crate) fn contract(msg: impl Into<String>) -> FleetError {
    FleetError::Contract(msg.into())
}
