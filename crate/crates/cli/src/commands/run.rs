use fleet_core::apps::camera::{camera_eval, track_query, train_day, DayQueries, QueryResult};
use fleet_core::mission::{baseline_automated, baseline_classic_rl, run_mission, AutomatedStop, EdgeHook, MissionOptions};
use fleet_core::{metric, EvalReport, ModelEnsemble};
use serde::Serialize;

use crate::config::{App, Baseline, MissionConfig};
use crate::error::CliError;
use crate::output::{Outcome, Outputs};
use crate::setup;

#[derive(Debug, Serialize)]
struct QueryRow {
    target: usize,
    camera: usize,
    minute: u32,
    returned: usize,
    frames_searched: usize,
    exhaustive_frames: usize,
    precision: f64,
    recall: f64,
}

fn headline(report: &EvalReport) -> String {
    let show = |m: &str| report.metric(m).map(|v| format!("{m} {v:.4}")).unwrap_or_default();
    [metric::ACCURACY, metric::COVERAGE, metric::STEPS, metric::FRAMES_SEARCHED]
        .iter()
        .map(|m| show(m))
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(", ")
}

fn run_crop(cfg: &MissionConfig, outputs: &mut Outputs) -> Result<EvalReport, CliError> {
    let fleet = setup::crop_fleet(cfg, cfg.agents)?;
    let ctx = setup::runtime_field(cfg, cfg.seed)?;
    let outcome = match cfg.baseline {
        Some(Baseline::Automated) => {
            let report = baseline_automated(&fleet, &ctx, AutomatedStop::Goals)?;
            outputs.json("eval_report.json", &report)?;
            return Ok(report);
        }
        Some(Baseline::Classic) => {
            let models = [ModelEnsemble::single(setup::base_model(cfg)?)];
            baseline_classic_rl(&fleet, &ctx, &models, cfg.seed)?
        }
        None => {
            let policy = setup::required_policy(cfg)?;
            let models = [ModelEnsemble::single(policy.base)];
            let opts = MissionOptions::default();
            if cfg.cluster {
                let mut rt = cfg.edge.build();
                let hook = EdgeHook { runtime: &mut rt, config: &cfg.edge };
                let out = run_mission(&fleet, &ctx, &models, &policy.spec, &opts, Some(hook), cfg.seed)?;
                outputs.csv("scheduler.csv", &rt.scheduler_trace)?;
                outputs.csv("energy.csv", &rt.energy_trace)?;
                out
            } else {
                run_mission(&fleet, &ctx, &models, &policy.spec, &opts, None, cfg.seed)?
            }
        }
    };
    outputs.json("eval_report.json", &outcome.report)?;
    let mut trace = Vec::new();
    outcome.trace.write_csv(&mut trace)?;
    outputs.bytes("mission_trace.csv", trace);
    Ok(outcome.report)
}

/// Trains on day 0 and answers every query of the next day.
fn run_camera(cfg: &MissionConfig, outputs: &mut Outputs) -> Result<EvalReport, CliError> {
    if cfg.baseline.is_some() {
        return Err(CliError::Config("baseline: baselines apply to the crop app only".into()));
    }
    let goals = setup::camera_goals(cfg)?;
    let ds = setup::trajectories(cfg, cfg.seed)?;
    let t = cfg.camera.tracking();
    let model = train_day(&ds, 0, &goals, &t, cfg.seed)?;
    let day = ds.n_days().min(2) - 1;
    let queries = DayQueries::new(ds.day(day), ds.grid.n_cameras, t.window)?;
    let results = queries
        .queries
        .iter()
        .map(|&q| track_query(q, &model, &queries.index))
        .collect::<Result<Vec<QueryResult>, _>>()?;
    let report = camera_eval(&results, &goals)?;
    let rows: Vec<QueryRow> = queries
        .queries
        .iter()
        .zip(&results)
        .map(|(q, r)| QueryRow {
            target: q.target,
            camera: q.camera,
            minute: q.minute,
            returned: r.returned.len(),
            frames_searched: r.frames_searched,
            exhaustive_frames: r.exhaustive_frames,
            precision: r.precision,
            recall: r.recall,
        })
        .collect();
    outputs.json("eval_report.json", &report)?;
    outputs.csv("mission_trace.csv", &rows)?;
    Ok(report)
}

pub fn run(cfg: &MissionConfig) -> Result<Outcome, CliError> {
    let mut outputs = Outputs::default();
    let report = match cfg.app {
        App::Crop => run_crop(cfg, &mut outputs)?,
        App::Camera => run_camera(cfg, &mut outputs)?,
    };
    let goals = setup::goals(cfg)?;
    Ok(Outcome { goals_met: goals.all_met(&report)?, summary: headline(&report), outputs })
}
