//! State-space vectors and per-group feature spaces.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{contract, FleetError, Result};
use crate::grid::StateId;
use crate::scalar::Real;

/// Min-max normalizes `raw` against per-feature `(min, max)` and clamps to
/// `[0, 1]`. Features with `max <= min` are constant and map to 0.
pub fn normalize_features<T: Real>(raw: &[T], norms: &[(T, T)]) -> Result<Vec<T>> {
    if raw.len() != norms.len() {
        return Err(contract(format!("{} raw features but {} norms", raw.len(), norms.len())));
    }
    Ok(raw
        .iter()
        .zip(norms)
        .map(|(&x, &(lo, hi))| {
            if hi <= lo {
                T::zero()
            } else {
                ((x - lo) / (hi - lo)).max(T::zero()).min(T::one())
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StateSpaceVector<T> {
    pub features: Vec<T>,
    pub origin_state: StateId,
    pub origin_agent: usize,
}

impl<T: Real> StateSpaceVector<T> {
    pub fn new(features: Vec<T>, origin_state: StateId, origin_agent: usize) -> Result<Self> {
        if let Some(f) = features.iter().find(|f| !(**f >= T::zero() && **f <= T::one())) {
            return Err(FleetError::Contract(format!("feature {f} outside [0, 1]")));
        }
        Ok(Self { features, origin_state, origin_agent })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Append-only collection of SSVs, at most one per visited state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FeatureSpace<T> {
    vectors: Vec<StateSpaceVector<T>>,
    visited: BTreeSet<StateId>,
}

impl<T> Default for FeatureSpace<T> {
    fn default() -> Self {
        Self { vectors: Vec::new(), visited: BTreeSet::new() }
    }
}

impl<T: Real> FeatureSpace<T> {
    pub fn push(&mut self, ssv: StateSpaceVector<T>) -> Result<()> {
        if !self.visited.insert(ssv.origin_state) {
            return Err(contract(format!("state {} already in feature space", ssv.origin_state)));
        }
        self.vectors.push(ssv);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[StateSpaceVector<T>] {
        &self.vectors
    }

    pub fn visited(&self) -> &BTreeSet<StateId> {
        &self.visited
    }

    pub fn contains(&self, s: StateId) -> bool {
        self.visited.contains(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_features(&[5.0], &[(0.0, 10.0)]).unwrap(), vec![0.5]);
        assert_eq!(normalize_features(&[0.0, -1.0], &[(0.0, 10.0), (-1.0, 3.0)]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(normalize_features(&[12.0], &[(0.0, 10.0)]).unwrap(), vec![1.0]);
        assert_eq!(normalize_features(&[7.0f32], &[(2.0, 2.0)]).unwrap(), vec![0.0]);
        assert!(normalize_features(&[1.0, 2.0], &[(0.0, 1.0)]).is_err());
    }

    #[test]
    fn feature_space_rejects_duplicate_states() {
        let mut fs = FeatureSpace::default();
        let s = StateId::new(1, 1);
        fs.push(StateSpaceVector::new(vec![0.2], s, 0).unwrap()).unwrap();
        assert!(fs.push(StateSpaceVector::new(vec![0.3], s, 0).unwrap()).is_err());
        assert_eq!(fs.len(), fs.visited().len());
    }

    proptest! {
        #[test]
        fn normalized_output_is_in_unit_box(
            raw in prop::collection::vec(-1e6f64..1e6, 1..8),
            lo in -100.0f64..100.0,
            span in 0.0f64..50.0,
        ) {
            let norms = vec![(lo, lo + span); raw.len()];
            for v in normalize_features(&raw, &norms).unwrap() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
