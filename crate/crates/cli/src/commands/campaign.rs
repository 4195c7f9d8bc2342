use fleet_cluster::EdgeRuntime;
use fleet_core::apps::camera::{staleness, DayRecall};
use fleet_core::mission::{run_campaign, CampaignConfig, CampaignResult};
use fleet_core::shaping::BoSettings;
use fleet_core::metric;
use serde::Serialize;

use crate::config::{App, MissionConfig};
use crate::error::CliError;
use crate::output::{Outcome, Outputs};
use crate::setup::{self, Policy};

#[derive(Debug, Serialize)]
struct SummaryRow {
    mission: usize,
    accuracy: f64,
    steps: f64,
    agent_energy: f64,
    edge_energy: f64,
    loss: f64,
    goals_met: bool,
}

#[derive(Debug, Serialize)]
struct DayRow {
    day: usize,
    recall: f64,
    frames_searched: f64,
}

pub fn campaign_config(cfg: &MissionConfig) -> CampaignConfig<f64> {
    CampaignConfig {
        n_missions: cfg.missions,
        online: cfg.online,
        aggregation: cfg.campaign.aggregation,
        sweeps: cfg.campaign.sweeps,
        weight_search: BoSettings::default().with_epochs(cfg.campaign.weight_search_epochs),
    }
}

/// Flies the configured campaign over the field family for `seed`; the
/// edge runtime is returned when the cluster is enabled.
pub fn crop_campaign(
    cfg: &MissionConfig,
    policy: &Policy,
    seed: u64,
) -> Result<(CampaignResult<f64>, Option<EdgeRuntime>), CliError> {
    let fleet = setup::crop_fleet(cfg, cfg.agents)?;
    let fields = setup::field_family(cfg, seed, cfg.missions)?;
    let ccfg = campaign_config(cfg);
    if cfg.cluster {
        let mut rt = cfg.edge.build();
        let out = run_campaign(&fleet, &fields, &policy.base, &policy.spec, &ccfg, Some((&mut rt, &cfg.edge)), seed)?;
        Ok((out, Some(rt)))
    } else {
        Ok((run_campaign(&fleet, &fields, &policy.base, &policy.spec, &ccfg, None, seed)?, None))
    }
}

fn run_crop(cfg: &MissionConfig, outputs: &mut Outputs) -> Result<(bool, String), CliError> {
    let policy = setup::required_policy(cfg)?;
    let (out, rt) = crop_campaign(cfg, &policy, cfg.seed)?;
    let rows = out
        .missions
        .iter()
        .map(|m| {
            let r = &m.report;
            Ok(SummaryRow {
                mission: m.mission,
                accuracy: r.metric(metric::ACCURACY)?,
                steps: r.metric(metric::STEPS)?,
                agent_energy: r.metric(metric::AGENT_ENERGY)?,
                edge_energy: r.metric(metric::EDGE_ENERGY)?,
                loss: m.loss,
                goals_met: m.goals_met,
            })
        })
        .collect::<Result<Vec<_>, fleet_core::FleetError>>()?;
    outputs.json("campaign_reports.json", &out.missions)?;
    outputs.json("usefulness_history.json", &out.usefulness_history())?;
    outputs.csv("campaign_summary.csv", &rows)?;
    if let Some(rt) = rt {
        outputs.csv("scheduler.csv", &rt.scheduler_trace)?;
        outputs.csv("energy.csv", &rt.energy_trace)?;
    }
    let last = rows.last().expect("campaign has at least one mission");
    let summary = format!(
        "{} missions, accuracy {:.4} -> {:.4}, final goals met {}",
        rows.len(),
        rows[0].accuracy,
        last.accuracy,
        last.goals_met
    );
    Ok((last.goals_met, summary))
}

/// Per-day recall over the dataset, with the retrained model when online
/// and the day-0 model otherwise.
fn run_camera(cfg: &MissionConfig, outputs: &mut Outputs) -> Result<(bool, String), CliError> {
    let goals = setup::camera_goals(cfg)?;
    let ds = setup::trajectories(cfg, cfg.seed)?;
    let days: Vec<DayRecall> = staleness(&ds, &goals, &cfg.camera.tracking(), cfg.seed)?;
    let rows: Vec<DayRow> = days
        .iter()
        .map(|d| {
            let (recall, frames_searched) =
                if cfg.online { (d.retrained, d.retrained_frames) } else { (d.frozen, d.frozen_frames) };
            DayRow { day: d.day, recall, frames_searched }
        })
        .collect();
    outputs.json("campaign_reports.json", &days)?;
    outputs.csv("campaign_summary.csv", &rows)?;
    let target = goals.target(metric::ACCURACY);
    let last = rows.last().expect("dataset has at least one day");
    let met = target.is_none_or(|t| last.recall >= t);
    let summary = format!("{} days, recall {:.4} -> {:.4}", rows.len(), rows[0].recall, last.recall);
    Ok((met, summary))
}

pub fn run(cfg: &MissionConfig) -> Result<Outcome, CliError> {
    let mut outputs = Outputs::default();
    let (goals_met, summary) = match cfg.app {
        App::Crop => run_crop(cfg, &mut outputs)?,
        App::Camera => run_camera(cfg, &mut outputs)?,
    };
    Ok(Outcome { outputs, goals_met, summary })
}
