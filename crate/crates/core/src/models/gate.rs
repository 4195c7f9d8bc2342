use serde::{Deserialize, Serialize};

use crate::features::FeatureSpace;
use crate::models::RewardSpec;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateDecision {
    Stay,
    Leave,
}

/// History-to-Action gate over one state group: leave once the group's
/// accumulated utility `U` exceeds `t_u` or its visit count `V` exceeds `t_v`.
/// Both comparisons are strict.
pub fn ha_gate<T: Real>(group_fs: &FeatureSpace<T>, group_rewards: &[T], spec: &RewardSpec<T>) -> GateDecision {
    debug_assert_eq!(group_fs.len(), group_rewards.len());
    let utility: T = group_rewards.iter().copied().sum();
    let visits = group_fs.len() as u64;
    if utility > spec.t_u || visits > u64::from(spec.t_v) {
        GateDecision::Leave
    } else {
        GateDecision::Stay
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::StateSpaceVector;
    use crate::grid::StateId;

    fn fs(n: usize) -> FeatureSpace<f64> {
        let mut fs = FeatureSpace::default();
        for i in 0..n {
            fs.push(StateSpaceVector::new(vec![0.0], StateId::new(0, i), 0).unwrap()).unwrap();
        }
        fs
    }

    #[test]
    fn gate_examples() {
        let spec = RewardSpec::new(vec![1.0], 5.0, 9).unwrap();
        assert_eq!(ha_gate(&fs(3), &[2.0, 2.0, 3.0], &spec), GateDecision::Leave);
        assert_eq!(ha_gate(&fs(0), &[], &spec), GateDecision::Stay);
        let strict = RewardSpec { weights: vec![1.0], t_u: f64::INFINITY, t_v: 3 };
        assert_eq!(ha_gate(&fs(3), &[0.0; 3], &strict), GateDecision::Stay);
        assert_eq!(ha_gate(&fs(4), &[0.0; 4], &strict), GateDecision::Leave);
    }

    #[test]
    fn full_exploration_never_leaves_early() {
        let spec = RewardSpec::full_exploration(vec![1.0]);
        for n in 0..=9 {
            assert_eq!(ha_gate(&fs(n), &vec![1.0; n], &spec), GateDecision::Stay);
        }
    }
}
