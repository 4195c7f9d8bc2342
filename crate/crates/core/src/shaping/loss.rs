use crate::error::{contract, Result};
use crate::fleetspec::CostWeights;
use crate::goals::{metric, EvalReport, Goals};

/// Goal-hinge loss of one evaluation plus weighted cost terms.
///
/// Each goal contributes its relative shortfall (0 once met). Steps are
/// normalized by the state count, agent energy by the energy budget.
pub fn loss(goals: &Goals, report: &EvalReport, costs: &CostWeights) -> Result<f64> {
    let mut total = 0.0;
    for g in goals.iter() {
        total += g.hinge(report.metric(&g.metric)?);
    }
    if costs.steps != 0.0 {
        let states = report.metric(metric::STATES)?;
        if states <= 0.0 {
            return Err(contract("step cost needs a positive state count"));
        }
        total += costs.steps * report.metric(metric::STEPS)? / states;
    }
    if costs.energy != 0.0 {
        if costs.energy_budget <= 0.0 {
            return Err(contract("energy cost needs a positive energy budget"));
        }
        total += costs.energy * report.metric(metric::AGENT_ENERGY)? / costs.energy_budget;
    }
    Ok(total)
}
