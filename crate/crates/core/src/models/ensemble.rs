use rand::Rng;

use crate::error::{contract, Result};
use crate::grid::{ActionId, StateId};
use crate::models::{epsilon_greedy, QTable};
use crate::scalar::Real;

/// Retrained SA variants (index 0 is the base model) mixed by a simplex
/// weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEnsemble<T> {
    models: Vec<QTable<T>>,
    weights: Vec<T>,
}

pub(crate) fn simplex_tolerance<T: Real>(len: usize) -> T {
    T::lit(1e-9).max(T::epsilon() * T::lit(4.0 * len.max(1) as f64))
}

impl<T: Real> ModelEnsemble<T> {
    pub fn new(models: Vec<QTable<T>>, weights: Vec<T>) -> Result<Self> {
        if models.is_empty() {
            return Err(contract("ensemble needs at least one model"));
        }
        if models.len() != weights.len() {
            return Err(contract(format!("{} models but {} weights", models.len(), weights.len())));
        }
        if weights.iter().any(|w| !(*w >= T::zero())) {
            return Err(contract("ensemble weights must be non-negative"));
        }
        let sum: T = weights.iter().copied().sum();
        if (sum - T::one()).abs() > simplex_tolerance(weights.len()) {
            return Err(contract(format!("ensemble weights sum to {sum}, not 1")));
        }
        Ok(Self { models, weights })
    }

    pub fn single(model: QTable<T>) -> Self {
        Self { models: vec![model], weights: vec![T::one()] }
    }

    pub fn models(&self) -> &[QTable<T>] {
        &self.models
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Index of the heaviest model, lowest index on ties.
    pub fn dominant(&self) -> usize {
        let mut best = 0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// `sum_k x_k Q_k(s, a)`.
    pub fn score(&self, s: StateId, a: ActionId) -> T {
        self.models.iter().zip(&self.weights).map(|(m, &w)| w * m.get(s, a)).sum()
    }
}

/// Epsilon-greedy over the weighted sum of member Q-values.
pub fn ensemble_select<T: Real, R: Rng + ?Sized>(
    ens: &ModelEnsemble<T>,
    s: StateId,
    valid: &[ActionId],
    epsilon: f64,
    rng: &mut R,
) -> Result<ActionId> {
    epsilon_greedy(valid, epsilon, rng, |a| ens.score(s, a))
}
