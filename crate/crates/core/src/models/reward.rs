use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::scalar::Real;

/// Feature weights plus the two History-to-Action thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RewardSpec<T> {
    pub weights: Vec<T>,
    /// Utility threshold; `+inf` disables utility gating.
    pub t_u: T,
    /// Visited-count threshold.
    pub t_v: u32,
}

impl<T: Real> RewardSpec<T> {
    pub fn new(weights: Vec<T>, t_u: T, t_v: u32) -> Result<Self> {
        let spec = Self { weights, t_u, t_v };
        spec.validate()?;
        Ok(spec)
    }

    /// Gating never fires before a group is exhausted.
    pub fn full_exploration(weights: Vec<T>) -> Self {
        Self { weights, t_u: T::infinity(), t_v: u32::MAX }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.weights.iter().find(|w| !(**w >= T::zero() && **w <= T::one())) {
            return Err(contract(format!("reward weight {w} outside [0, 1]")));
        }
        if self.t_u.is_nan() || self.t_u < T::zero() {
            return Err(contract(format!("utility threshold {} must be non-negative", self.t_u)));
        }
        Ok(())
    }
}

/// Weighted sum of the normalized features of the state just entered.
pub fn reward<T: Real>(ssv: &[T], spec: &RewardSpec<T>) -> Result<T> {
    if ssv.len() != spec.weights.len() {
        return Err(contract(format!("{} features but {} weights", ssv.len(), spec.weights.len())));
    }
    Ok(ssv.iter().zip(&spec.weights).map(|(&f, &w)| f * w).sum())
}
