//! State-to-Action tables, the parametric reward, the History-to-Action gate
//! and usefulness-weighted ensembles.

mod ensemble;
mod gate;
mod qtable;
mod reward;

pub use ensemble::{ensemble_select, ModelEnsemble};
pub use gate::{ha_gate, GateDecision};
pub use qtable::{q_update, select_action, QEntry, QTable};
pub use reward::{reward, RewardSpec};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::grid::ActionId;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct LearningParams<T> {
    pub alpha: T,
    pub gamma: T,
    /// Exploration rate of the first mission.
    pub epsilon: T,
    /// Multiplicative per-mission decay of the exploration rate.
    pub epsilon_decay: T,
}

impl<T: Real> Default for LearningParams<T> {
    fn default() -> Self {
        Self { alpha: T::lit(0.5), gamma: T::lit(0.9), epsilon: T::lit(0.1), epsilon_decay: T::lit(0.8) }
    }
}

impl<T: Real> LearningParams<T> {
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        if !(self.alpha > zero && self.alpha <= one) {
            return Err(contract(format!("alpha {} must be in (0, 1]", self.alpha)));
        }
        if !(self.gamma >= zero && self.gamma < one) {
            return Err(contract(format!("gamma {} must be in [0, 1)", self.gamma)));
        }
        if !(self.epsilon >= zero && self.epsilon <= one) {
            return Err(contract(format!("epsilon {} must be in [0, 1]", self.epsilon)));
        }
        if !(self.epsilon_decay > zero && self.epsilon_decay <= one) {
            return Err(contract(format!("epsilon decay {} must be in (0, 1]", self.epsilon_decay)));
        }
        Ok(())
    }

    /// Exploration rate for the zero-based mission index.
    pub fn epsilon_for_mission(&self, mission: usize) -> T {
        self.epsilon * self.epsilon_decay.powi(mission as i32)
    }
}

/// Epsilon-greedy choice over `valid`: with probability `epsilon` a uniform
/// pick, otherwise the highest `score`, ties going to the smallest ordinal.
/// No randomness is drawn when `epsilon` is 0.
pub(crate) fn epsilon_greedy<T: Real, R: Rng + ?Sized>(
    valid: &[ActionId],
    epsilon: f64,
    rng: &mut R,
    mut score: impl FnMut(ActionId) -> T,
) -> Result<ActionId> {
    if valid.is_empty() {
        return Err(contract("no valid actions to choose from"));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(contract(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return Ok(valid[rng.gen_range(0..valid.len())]);
    }
    let mut sorted = valid.to_vec();
    sorted.sort();
    let mut best = sorted[0];
    let mut best_score = score(best);
    for &a in &sorted[1..] {
        let s = score(a);
        if s > best_score {
            best = a;
            best_score = s;
        }
    }
    Ok(best)
}
