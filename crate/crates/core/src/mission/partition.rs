use crate::error::{contract, Result};
use crate::grid::{GridDims, StateGroupId, Tiling};

/// Splits the row-major group sequence into `n_agents` contiguous bands
/// whose sizes differ by at most one; earlier bands take the extra groups.
pub fn partition_states(dims: GridDims, tiling: Tiling, n_agents: usize) -> Result<Vec<Vec<StateGroupId>>> {
    let n_groups = tiling.n_groups(dims);
    if n_agents == 0 {
        return Err(contract("a partition needs at least one agent"));
    }
    if n_agents > n_groups {
        return Err(contract(format!("{n_agents} agents but only {n_groups} state groups")));
    }
    let base = n_groups / n_agents;
    let extra = n_groups % n_agents;
    let mut next = 0;
    Ok((0..n_agents)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let band = (next..next + len).map(StateGroupId).collect();
            next += len;
            band
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizes(n: usize) -> Vec<usize> {
        partition_states(GridDims::new(9, 9), Tiling::default(), n).unwrap().iter().map(Vec::len).collect()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(sizes(1), vec![9]);
        assert_eq!(sizes(4), vec![3, 2, 2, 2]);
        let four = partition_states(GridDims::new(6, 6), Tiling::default(), 4).unwrap();
        assert!(four.iter().all(|b| b.len() == 1));
        assert!(partition_states(GridDims::new(6, 6), Tiling::default(), 5).is_err());
    }
}
