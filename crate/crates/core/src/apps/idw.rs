use std::collections::BTreeMap;

use crate::error::{FleetError, Result};
use crate::grid::{GridDims, StateId};

/// Visited states consulted for each unvisited cell.
pub const IDW_NEIGHBORS: usize = 8;

/// Inverse-distance-weighted (power 2) fill of a full row-major map from
/// the [`IDW_NEIGHBORS`] nearest visited values; visited states keep their
/// values.
pub fn extrapolate(visited: &BTreeMap<StateId, f64>, dims: GridDims) -> Result<Vec<f64>> {
    extrapolate_with(visited, dims, IDW_NEIGHBORS)
}

/// IDW over the `neighbors` nearest visited states (equal distances broken
/// by row-major order); `usize::MAX` uses every visited state.
pub fn extrapolate_with(visited: &BTreeMap<StateId, f64>, dims: GridDims, neighbors: usize) -> Result<Vec<f64>> {
    if visited.is_empty() {
        return Err(FleetError::NothingVisited);
    }
    let known: Vec<(f64, f64, f64)> = visited.iter().map(|(s, &v)| (s.row as f64, s.col as f64, v)).collect();
    let k = neighbors.max(1).min(known.len());
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(known.len());
    Ok(dims
        .states()
        .map(|s| {
            if let Some(&v) = visited.get(&s) {
                return v;
            }
            let (r, c) = (s.row as f64, s.col as f64);
            dist.clear();
            dist.extend(known.iter().enumerate().map(|(i, &(kr, kc, _))| ((kr - r).powi(2) + (kc - c).powi(2), i)));
            let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < dist.len() {
                dist.select_nth_unstable_by(k - 1, order);
                dist.truncate(k);
            }
            dist.sort_unstable_by(order);
            let mut num = 0.0;
            let mut den = 0.0;
            for &(d2, i) in dist.iter() {
                let w = 1.0 / d2;
                num += w * known[i].2;
                den += w;
            }
            num / den
        })
        .collect())
}
