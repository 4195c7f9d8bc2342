use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::{contract, Result};
use crate::features::{FeatureSpace, StateSpaceVector};
use crate::fleetspec::{FleetSpec, Perf};
use crate::goals::EvalReport;
use crate::grid::{GridDims, StateId};
use crate::mission::driver::{run_mission, MissionMode, MissionOptions, MissionOutcome};
use crate::models::{ModelEnsemble, RewardSpec};
use crate::scalar::Real;

/// When the pre-programmed sweep stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutomatedStop {
    /// Once this fraction of all states has been visited.
    Coverage(f64),
    /// Once Eval reports every FleetSpec goal met.
    Goals,
}

/// Splits the rows into contiguous bands (sizes differ by at most one) and
/// lists each band's cells in boustrophedon order.
pub fn serpentine_bands(dims: GridDims, n_agents: usize) -> Result<Vec<Vec<StateId>>> {
    if n_agents == 0 || n_agents > dims.height {
        return Err(contract(format!("{n_agents} agents cannot split {} rows", dims.height)));
    }
    let base = dims.height / n_agents;
    let extra = dims.height % n_agents;
    let mut row = 0;
    Ok((0..n_agents)
        .map(|i| {
            let rows = base + usize::from(i < extra);
            let mut cells = Vec::with_capacity(rows * dims.width);
            for k in 0..rows {
                let r = row + k;
                if k % 2 == 0 {
                    cells.extend((0..dims.width).map(|c| StateId::new(r, c)));
                } else {
                    cells.extend((0..dims.width).rev().map(|c| StateId::new(r, c)));
                }
            }
            row += rows;
            cells
        })
        .collect())
}

/// Row-by-row sweep without learning or gating.
pub fn baseline_automated<T: Real>(fleet: &FleetSpec<T>, ctx: &ExecutionContext, stop: AutomatedStop) -> Result<EvalReport> {
    if let AutomatedStop::Coverage(f) = stop {
        if !(f > 0.0 && f <= 1.0) {
            return Err(contract(format!("coverage goal {f} outside (0, 1]")));
        }
    }
    let dims = ctx.dims();
    let bands = serpentine_bands(dims, fleet.n_agents)?;
    let needed = match stop {
        AutomatedStop::Coverage(f) => ((f * dims.n_states() as f64) - 1e-9).ceil() as usize,
        AutomatedStop::Goals => usize::MAX,
    };
    let mut fs = FeatureSpace::default();
    let mut energy = 0.0;
    let mut tick = 0u64;
    let mut done = false;
    let longest = bands.iter().map(Vec::len).max().unwrap_or(0);
    while !done && (tick as usize) < longest {
        for (agent, band) in bands.iter().enumerate() {
            let Some(&s) = band.get(tick as usize) else { continue };
            let features = fleet.map_fn.map(ctx.sense(s))?;
            fs.push(StateSpaceVector::new(features, s, agent)?)?;
            energy += fleet.energy.sense_cost + if tick > 0 { fleet.energy.move_cost } else { 0.0 };
            done = match stop {
                AutomatedStop::Coverage(_) => fs.len() >= needed,
                AutomatedStop::Goals => {
                    let probe = fleet.eval_fn.eval(ctx, &fs, &Perf { steps: tick + 1, ..Perf::default() })?;
                    fleet.goals.all_met(&probe)?
                }
            };
            if done {
                break;
            }
        }
        tick += 1;
    }
    for band in &bands {
        let active = (band.len() as u64).min(tick);
        energy += (tick - active) as f64 * fleet.energy.idle_per_tick;
    }
    let perf = Perf { steps: tick, agent_energy: energy, edge_energy: 0.0, groups_done: done };
    fleet.eval_fn.eval(ctx, &fs, &perf)
}

/// Q-learning without the gate: uniform reward weights, every group fully
/// explorable, stopping once Eval meets the goals.
pub fn baseline_classic_rl<T: Real>(
    fleet: &FleetSpec<T>,
    ctx: &ExecutionContext,
    models: &[ModelEnsemble<T>],
    seed: u64,
) -> Result<MissionOutcome<T>> {
    let m = fleet.n_features();
    let spec = RewardSpec::full_exploration(vec![T::one() / T::lit(m.max(1) as f64); m]);
    let opts = MissionOptions { mode: MissionMode::Classic, ..MissionOptions::default() };
    run_mission(fleet, ctx, models, &spec, &opts, None, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serpentine_order() {
        let bands = serpentine_bands(GridDims::new(3, 2), 1).unwrap();
        let cells: Vec<(usize, usize)> = bands[0].iter().map(|s| (s.row, s.col)).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (0, 2), (1, 2), (1, 1), (1, 0)]);
        let two = serpentine_bands(GridDims::new(6, 6), 2).unwrap();
        assert_eq!(two[0].len(), 18);
        assert_eq!(two[1][0], StateId::new(3, 0));
        assert!(serpentine_bands(GridDims::new(2, 2), 3).is_err());
    }
}
