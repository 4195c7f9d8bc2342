use serde::{Deserialize, Serialize};

use crate::context::ExecutionContext;
use crate::error::{contract, Result};
use crate::fleetspec::FleetSpec;
use crate::goals::EvalReport;
use crate::mission::driver::{run_mission, EdgeHook, MissionOptions};
use crate::mission::edge::{submit_retraining, EdgeConfig};
use crate::mission::trace::MissionTrace;
use crate::models::{ModelEnsemble, QTable, RewardSpec};
use crate::online::{
    aggregate_usefulness, enumerate_aggregations, optimize_weights, retrain_variants, split_by_agent, AggregationMode,
    ModelUsefulness, UsefulnessReport, WeightSearch,
};
use crate::scalar::Real;
use crate::seeds::sub_seed;
use crate::shaping::{loss, BoSettings};
use fleet_cluster::EdgeRuntime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct CampaignConfig<T> {
    pub n_missions: usize,
    pub online: bool,
    /// Defaults to the powerset for small swarms, per-agent otherwise.
    pub aggregation: Option<AggregationMode>,
    /// Replay passes over the pooled traces per variant.
    pub sweeps: usize,
    pub weight_search: BoSettings<T>,
}

impl<T: Real> Default for CampaignConfig<T> {
    fn default() -> Self {
        Self { n_missions: 10, online: true, aggregation: None, sweeps: 1, weight_search: BoSettings::default().with_epochs(8) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignMission {
    pub mission: usize,
    pub report: EvalReport,
    pub loss: f64,
    pub goals_met: bool,
    /// Usefulness of the models learned after this mission.
    pub usefulness: UsefulnessReport,
}

#[derive(Debug, Clone)]
pub struct CampaignResult<T> {
    pub missions: Vec<CampaignMission>,
    pub traces: Vec<MissionTrace<T>>,
    /// Ensembles an agent would fly the next mission with.
    pub models: Vec<ModelEnsemble<T>>,
    pub base: QTable<T>,
}

impl<T> CampaignResult<T> {
    pub fn reports(&self) -> impl Iterator<Item = &EvalReport> + '_ {
        self.missions.iter().map(|m| &m.report)
    }

    pub fn usefulness_history(&self) -> Vec<&UsefulnessReport> {
        self.missions.iter().map(|m| &m.usefulness).collect()
    }
}

fn base_only(n_agents: usize) -> UsefulnessReport {
    UsefulnessReport {
        models: vec![ModelUsefulness { subset: Vec::new(), usefulness: 1.0 }],
        agent_weights: vec![vec![1.0]; n_agents],
    }
}

/// Flies `config.n_missions` missions, mission `i` over `contexts[i % len]`.
/// With `online`, each mission's traces retrain one variant per agent
/// subset, every agent's mixing weights are searched on the context just
/// flown, the retrain jobs are queued on the edge cluster by usefulness, and
/// the most useful variant becomes the base for the next round.
pub fn run_campaign<T: Real>(
    fleet: &FleetSpec<T>,
    contexts: &[ExecutionContext],
    base: &QTable<T>,
    spec: &RewardSpec<T>,
    config: &CampaignConfig<T>,
    mut edge: Option<(&mut EdgeRuntime, &EdgeConfig)>,
    seed: u64,
) -> Result<CampaignResult<T>> {
    if config.n_missions == 0 {
        return Err(contract("campaign needs at least one mission"));
    }
    if contexts.is_empty() {
        return Err(contract("campaign needs at least one context"));
    }
    let n = fleet.n_agents;
    let mode = config.aggregation.unwrap_or(AggregationMode::for_swarm(n));
    let aggs = enumerate_aggregations(n, mode)?;
    let mut base = base.clone();
    let mut models = vec![ModelEnsemble::single(base.clone()); n];
    let mut missions = Vec::with_capacity(config.n_missions);
    let mut traces = Vec::with_capacity(config.n_missions);

    for i in 0..config.n_missions {
        let ctx = &contexts[i % contexts.len()];
        let opts = MissionOptions { mission_index: i, ..MissionOptions::default() };
        let mission_seed = sub_seed(seed, i as u64);
        let hook = edge.as_mut().map(|(rt, cfg)| EdgeHook { runtime: &mut **rt, config: *cfg });
        let out = run_mission(fleet, ctx, &models, spec, &opts, hook, mission_seed)?;
        let mission_loss = loss(&fleet.goals, &out.report, &fleet.costs)?;
        let goals_met = fleet.goals.all_met(&out.report)?;

        let usefulness = if config.online {
            let per_agent = split_by_agent(&out.trace.transitions, n);
            let variants = retrain_variants(&base, &per_agent, &aggs, spec, &fleet.learning, config.sweeps)?;
            let search = WeightSearch {
                fleet,
                contexts: std::slice::from_ref(ctx),
                spec,
                goals: &fleet.goals,
                peers: &models,
                settings: &config.weight_search,
                opts: MissionOptions { mission_index: i + 1, ..MissionOptions::default() },
            };
            let weights = (0..n)
                .map(|a| optimize_weights(a, &variants, &search, sub_seed(mission_seed, 0x77 + a as u64)))
                .collect::<Result<Vec<_>>>()?;
            let report = aggregate_usefulness(&aggs, &weights)?;
            if let Some((rt, cfg)) = edge.as_mut() {
                let jobs: Vec<(Vec<usize>, f64, usize)> = report
                    .models
                    .iter()
                    .filter(|m| !m.subset.is_empty())
                    .map(|m| (m.subset.clone(), m.usefulness, m.subset.iter().map(|&a| per_agent[a].len()).sum()))
                    .collect();
                submit_retraining(rt, cfg, i, &jobs)?;
                rt.run_until_idle(cfg.max_drain_ticks);
            }
            models = weights
                .into_iter()
                .map(|x| ModelEnsemble::new(variants.clone(), x))
                .collect::<Result<Vec<_>>>()?;
            base = variants[report.most_useful()].clone();
            report
        } else {
            base_only(n)
        };
        missions.push(CampaignMission { mission: i, report: out.report, loss: mission_loss, goals_met, usefulness });
        traces.push(out.trace);
    }
    Ok(CampaignResult { missions, traces, models, base })
}
