use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ClusterError;
use crate::node::NodeId;
use crate::replica::FragmentId;

/// Distance between adjacent retraining priority levels.
pub const PRIORITY_STEP: u64 = 100_000_000;
/// Level 10, reserved for sensor containers.
pub const SENSOR_PRIORITY: u64 = 1_000_000_000;

/// Maps a model usefulness in `[0, 1]` onto one of ten retraining priorities.
///
/// `round(10 U)` is clamped to level 9 so that `U = 1` stays below the level
/// reserved for sensor work.
pub fn priority(usefulness: f64) -> Result<u64, ClusterError> {
    if !(0.0..=1.0).contains(&usefulness) {
        return Err(ClusterError::InvalidUsefulness(usefulness));
    }
    let level = (10.0 * usefulness).round().min(9.0) as u64;
    Ok(level * PRIORITY_STEP)
}

pub fn priority_level(priority: u64) -> u64 {
    priority / PRIORITY_STEP
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Allocation {
    pub cpu: f64,
    pub mem: f64,
}

/// Splits `cpu_total`/`mem_total` among tasks in proportion to their
/// priority level. Level-0 tasks get nothing; if every level is 0 nothing
/// is handed out.
pub fn apportion(priorities: &[u64], cpu_total: f64, mem_total: f64) -> Vec<Allocation> {
    let levels: Vec<u64> = priorities.iter().map(|&p| priority_level(p)).collect();
    let sum: u64 = levels.iter().sum();
    if sum == 0 {
        return vec![Allocation::default(); priorities.len()];
    }
    levels
        .iter()
        .map(|&level| Allocation {
            cpu: cpu_total / sum as f64 * level as f64,
            mem: mem_total / sum as f64 * level as f64,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId(pub u64);

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskKind {
    /// Per-sense edge processing; fixed CPU, highest priority.
    Sensor,
    Retrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaskState {
    Pending,
    Running,
    Done,
    Dropped,
}

impl TaskState {
    pub fn label(self) -> &'static str {
        match self {
            TaskState::Pending => "pending",
            TaskState::Running => "running",
            TaskState::Done => "done",
            TaskState::Dropped => "dropped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub kind: TaskKind,
    /// Model subset this task retrains, e.g. `{0,2}`; free text for sensor tasks.
    pub label: String,
    pub usefulness: f64,
    pub priority: u64,
    pub fragments: BTreeSet<FragmentId>,
    /// Fragment written to the hosting node on completion.
    pub produces: Option<FragmentId>,
    pub work: f64,
    pub remaining: f64,
    /// CPU that must be free on a node for admission.
    pub request: f64,
    pub arrival: u64,
    pub state: TaskState,
    pub node: Option<NodeId>,
    pub cpu: f64,
    pub mem: f64,
    pub wait: u64,
    pub lifetime: u64,
}

impl Task {
    pub fn retrain(
        label: impl Into<String>,
        usefulness: f64,
        fragments: impl IntoIterator<Item = FragmentId>,
        work: f64,
    ) -> Result<Self, ClusterError> {
        assert!(work > 0.0, "work units must be positive");
        let priority = priority(usefulness)?;
        Ok(Self::base(TaskKind::Retrain, label.into(), usefulness, priority, fragments, work))
    }

    pub fn sensor(label: impl Into<String>, work: f64, produces: Option<FragmentId>) -> Self {
        assert!(work > 0.0, "work units must be positive");
        let mut task = Self::base(TaskKind::Sensor, label.into(), 1.0, SENSOR_PRIORITY, [], work);
        task.produces = produces;
        task
    }

    fn base(
        kind: TaskKind,
        label: String,
        usefulness: f64,
        priority: u64,
        fragments: impl IntoIterator<Item = FragmentId>,
        work: f64,
    ) -> Self {
        Self {
            id: TaskId(0),
            kind,
            label,
            usefulness,
            priority,
            fragments: fragments.into_iter().collect(),
            produces: None,
            work,
            remaining: work,
            request: 1.0,
            arrival: 0,
            state: TaskState::Pending,
            node: None,
            cpu: 0.0,
            mem: 0.0,
            wait: 0,
            lifetime: 0,
        }
    }

    pub fn with_request(mut self, request: f64) -> Self {
        self.request = request;
        self
    }

    pub fn level(&self) -> u64 {
        priority_level(self.priority)
    }

    pub fn is_finished(&self) -> bool {
        matches!(self.state, TaskState::Done | TaskState::Dropped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priority_examples() {
        assert_eq!(priority(0.0).unwrap(), 0);
        assert_eq!(priority(0.73).unwrap(), 700_000_000);
        assert_eq!(priority(1.0).unwrap(), 900_000_000);
        assert_eq!(priority(0.05).unwrap(), 100_000_000);
        assert!(priority(1.2).is_err());
        assert!(priority(-0.1).is_err());
    }

    #[test]
    fn apportion_examples() {
        let caps = apportion(&[9 * PRIORITY_STEP, PRIORITY_STEP], 10.0, 20.0);
        assert_eq!(caps[0].cpu, 9.0);
        assert_eq!(caps[1].cpu, 1.0);
        assert_eq!(caps[0].mem, 18.0);

        let sole = apportion(&[5 * PRIORITY_STEP], 10.0, 10.0);
        assert_eq!(sole[0].cpu, 10.0);

        let zero = apportion(&[0, 3 * PRIORITY_STEP], 10.0, 10.0);
        assert_eq!(zero[0].cpu, 0.0);
        assert_eq!(zero[1].cpu, 10.0);

        let none = apportion(&[0, 0], 10.0, 10.0);
        assert!(none.iter().all(|a| a.cpu == 0.0 && a.mem == 0.0));
    }
}
