use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FleetError, Result};
use crate::grid::{ActionId, StateId};
use crate::models::{epsilon_greedy, LearningParams};
use crate::scalar::Real;

/// Sparse Q-table; unseen pairs read as zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QTable<T> {
    values: HashMap<(StateId, ActionId), T>,
}

/// One serialized Q-table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QEntry<T> {
    pub state: [usize; 2],
    pub action: ActionId,
    pub q: T,
}

impl<T: Real> QTable<T> {
    pub fn new() -> Self {
        Self { values: HashMap::new() }
    }

    pub fn get(&self, s: StateId, a: ActionId) -> T {
        self.values.get(&(s, a)).copied().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, s: StateId, a: ActionId, q: T) {
        debug_assert!(q.is_finite());
        self.values.insert((s, a), q);
    }

    pub fn max_over(&self, s: StateId, actions: &[ActionId]) -> T {
        actions.iter().map(|&a| self.get(s, a)).fold(T::neg_infinity(), T::max)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Stored entries sorted by `(row, col, action)`.
    pub fn entries(&self) -> Vec<QEntry<T>> {
        let mut rows: Vec<QEntry<T>> = self
            .values
            .iter()
            .map(|(&(s, a), &q)| QEntry { state: [s.row, s.col], action: a, q })
            .collect();
        rows.sort_by(|x, y| (x.state, x.action).cmp(&(y.state, y.action)));
        rows
    }

    pub fn keys(&self) -> impl Iterator<Item = (StateId, ActionId)> + '_ {
        self.values.keys().copied()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.entries()).map_err(|e| FleetError::Parse(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rows: Vec<QEntry<T>> = serde_json::from_str(text).map_err(|e| FleetError::Parse(e.to_string()))?;
        let mut table = Self::new();
        for r in rows {
            if !r.q.is_finite() {
                return Err(FleetError::NonFinite(format!("q at ({}, {})", r.state[0], r.state[1])));
            }
            table.set(StateId::new(r.state[0], r.state[1]), r.action, r.q);
        }
        Ok(table)
    }
}

/// One Bellman backup:
/// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`,
/// with the max over `valid_next`. Returns the new value.
pub fn q_update<T: Real>(
    table: &mut QTable<T>,
    s: StateId,
    a: ActionId,
    s_next: StateId,
    r: T,
    params: &LearningParams<T>,
    valid_next: &[ActionId],
) -> T {
    debug_assert!(r.is_finite(), "reward must be finite");
    debug_assert!(!valid_next.is_empty(), "valid_next must be non-empty");
    let old = table.get(s, a);
    let future = table.max_over(s_next, valid_next);
    let new = (T::one() - params.alpha) * old + params.alpha * (r + params.gamma * future);
    table.set(s, a, new);
    new
}

pub fn select_action<T: Real, R: Rng + ?Sized>(
    table: &QTable<T>,
    s: StateId,
    valid: &[ActionId],
    epsilon: f64,
    rng: &mut R,
) -> Result<ActionId> {
    epsilon_greedy(valid, epsilon, rng, |a| table.get(s, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: f64, gamma: f64) -> LearningParams<f64> {
        LearningParams { alpha, gamma, ..LearningParams::default() }
    }

    #[test]
    fn update_examples() {
        let s = StateId::new(0, 0);
        let n = StateId::new(0, 1);
        let all = ActionId::ALL;

        let mut t = QTable::new();
        t.set(s, ActionId::East, 3.0);
        let frozen = LearningParams { alpha: 0.0, ..params(0.5, 0.9) };
        assert_eq!(q_update(&mut t, s, ActionId::East, n, 1.0, &frozen, &all), 3.0);

        let mut t = QTable::new();
        assert_eq!(q_update(&mut t, s, ActionId::East, n, 1.0, &params(0.5, 0.9), &all), 0.5);

        let mut t = QTable::new();
        t.set(s, ActionId::East, 2.0);
        t.set(n, ActionId::West, 2.0);
        assert_eq!(q_update(&mut t, s, ActionId::East, n, 0.0, &params(0.5, 0.5), &all), 1.5);
    }

    #[test]
    fn selection_examples() {
        let s = StateId::new(1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut t = QTable::new();
        t.set(s, ActionId::East, 1.0);
        assert_eq!(select_action(&t, s, &ActionId::ALL, 0.0, &mut rng).unwrap(), ActionId::East);

        let flat: QTable<f64> = QTable::new();
        assert_eq!(select_action(&flat, s, &ActionId::ALL, 0.0, &mut rng).unwrap(), ActionId::North);
        assert!(select_action(&flat, s, &[], 0.0, &mut rng).is_err());

        let draws = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| select_action(&flat, s, &ActionId::ALL, 1.0, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draws(9), draws(9));
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let mut t = QTable::new();
        t.set(StateId::new(2, 0), ActionId::North, 0.25);
        t.set(StateId::new(0, 1), ActionId::West, 1.5);
        t.set(StateId::new(0, 1), ActionId::South, -0.5);
        let text = t.to_json().unwrap();
        assert!(text.starts_with(r#"[{"state":[0,1],"action":"South""#), "{text}");
        assert_eq!(QTable::<f64>::from_json(&text).unwrap(), t);
    }
}
