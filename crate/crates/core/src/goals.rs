//! Autonomy goals and mission evaluation reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{contract, FleetError, Result};

pub mod metric {
    pub const ACCURACY: &str = "accuracy";
    pub const COVERAGE: &str = "coverage";
    pub const STEPS: &str = "mission_steps";
    pub const AGENT_ENERGY: &str = "agent_energy";
    pub const EDGE_ENERGY: &str = "edge_energy";
    /// Ticks until the edge finished processing every sensed state.
    pub const COMPLETION: &str = "completion_ticks";
    pub const VISITED: &str = "visited";
    pub const STATES: &str = "states";
    pub const PRECISION: &str = "precision";
    pub const FRAMES_SEARCHED: &str = "frames_searched";
    pub const THROUGHPUT: &str = "throughput";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub metric: String,
    pub comparator: Comparator,
    pub target: f64,
}

impl Goal {
    pub fn at_least(metric: impl Into<String>, target: f64) -> Self {
        Self { metric: metric.into(), comparator: Comparator::AtLeast, target }
    }

    pub fn at_most(metric: impl Into<String>, target: f64) -> Self {
        Self { metric: metric.into(), comparator: Comparator::AtMost, target }
    }

    pub fn met(&self, value: f64) -> bool {
        match self.comparator {
            Comparator::AtLeast => value >= self.target,
            Comparator::AtMost => value <= self.target,
        }
    }

    /// Relative shortfall (or overshoot for `<=` goals); 0 when met.
    pub fn hinge(&self, value: f64) -> f64 {
        let gap = match self.comparator {
            Comparator::AtLeast => self.target - value,
            Comparator::AtMost => value - self.target,
        };
        let scale = if self.target.abs() > 0.0 { self.target.abs() } else { 1.0 };
        (gap / scale).max(0.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Goals(pub Vec<Goal>);

impl Goals {
    pub fn new(goals: Vec<Goal>) -> Result<Self> {
        if let Some(g) = goals.iter().find(|g| !g.target.is_finite()) {
            return Err(contract(format!("goal on `{}` has a non-finite target", g.metric)));
        }
        Ok(Self(goals))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Goal> {
        self.0.iter()
    }

    pub fn all_met(&self, report: &EvalReport) -> Result<bool> {
        for g in &self.0 {
            if !g.met(report.metric(&g.metric)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks that every goal refers to one of `produced`.
    pub fn validate_against(&self, produced: &[&str]) -> Result<()> {
        match self.0.iter().find(|g| !produced.contains(&g.metric.as_str())) {
            Some(g) => Err(contract(format!("goal metric `{}` is not produced by Eval", g.metric))),
            None => Ok(()),
        }
    }

    pub fn target(&self, metric: &str) -> Option<f64> {
        self.0.iter().find(|g| g.metric == metric).map(|g| g.target)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub finished: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Final map (row-major) when the application produces one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub artifact: Option<Vec<f64>>,
}

impl EvalReport {
    pub fn metric(&self, name: &str) -> Result<f64> {
        self.metrics.get(name).copied().ok_or_else(|| FleetError::MissingMetric(name.to_string()))
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_is_zero_when_met_and_relative_otherwise() {
        let g = Goal::at_least(metric::ACCURACY, 0.9);
        assert_eq!(g.hinge(0.95), 0.0);
        assert!((g.hinge(0.81) - 0.1).abs() < 1e-12);
        let e = Goal::at_most(metric::AGENT_ENERGY, 100.0);
        assert!((e.hinge(150.0) - 0.5).abs() < 1e-12);
        assert_eq!(e.hinge(10.0), 0.0);
    }

    #[test]
    fn goals_reject_unknown_metrics() {
        let goals = Goals::new(vec![Goal::at_least("recall", 0.5)]).unwrap();
        assert!(goals.validate_against(&[metric::ACCURACY]).is_err());
        assert!(Goals::new(vec![Goal::at_least("x", f64::NAN)]).is_err());
    }
}
