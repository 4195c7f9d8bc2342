use fleet_core::apps::camera::{staleness, DayRecall};
use fleet_core::mission::{
    baseline_automated, baseline_classic_rl, run_mission, AutomatedStop, EdgeConfig, EdgeHook, MissionOptions,
};
use fleet_core::seeds::sub_seed;
use fleet_core::{load_context, metric, ExecutionContext, FleetSpec, ModelEnsemble};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::shape::shape_crop;
use crate::config::{App, MissionConfig};
use crate::error::CliError;
use crate::output::{Outcome, Outputs};
use crate::setup::{self, stream, Policy};

/// Raw per-seed measurements of the crop comparison suite.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CropRun {
    pub steps_single: f64,
    pub steps_fleet: f64,
    pub coverage_fleet: f64,
    pub coverage_classic: f64,
    pub coverage_automated: f64,
    pub accuracy_fleet: f64,
    pub accuracy_classic: f64,
    pub accuracy_automated: f64,
    pub energy_always_on: f64,
    pub energy_autoscaled: f64,
    pub completion_always_on: f64,
    pub completion_autoscaled: f64,
}

impl CropRun {
    fn mean(runs: &[CropRun]) -> CropRun {
        let k = runs.len() as f64;
        let avg = |f: fn(&CropRun) -> f64| runs.iter().map(f).sum::<f64>() / k;
        CropRun {
            steps_single: avg(|r| r.steps_single),
            steps_fleet: avg(|r| r.steps_fleet),
            coverage_fleet: avg(|r| r.coverage_fleet),
            coverage_classic: avg(|r| r.coverage_classic),
            coverage_automated: avg(|r| r.coverage_automated),
            accuracy_fleet: avg(|r| r.accuracy_fleet),
            accuracy_classic: avg(|r| r.accuracy_classic),
            accuracy_automated: avg(|r| r.accuracy_automated),
            energy_always_on: avg(|r| r.energy_always_on),
            energy_autoscaled: avg(|r| r.energy_autoscaled),
            completion_always_on: avg(|r| r.completion_always_on),
            completion_autoscaled: avg(|r| r.completion_autoscaled),
        }
    }

    pub fn speedup(&self) -> f64 {
        self.steps_single / self.steps_fleet
    }

    pub fn coverage_vs_classic(&self) -> f64 {
        self.coverage_fleet / self.coverage_classic
    }

    pub fn coverage_vs_automated(&self) -> f64 {
        self.coverage_fleet / self.coverage_automated
    }

    pub fn energy_saving(&self) -> f64 {
        self.energy_always_on / self.energy_autoscaled
    }

    pub fn completion_inflation(&self) -> f64 {
        self.completion_autoscaled / self.completion_always_on
    }
}

#[derive(Debug, Serialize)]
struct CropRow {
    seed: String,
    steps_single: f64,
    steps_fleet: f64,
    speedup: f64,
    coverage_fleet: f64,
    coverage_classic: f64,
    coverage_automated: f64,
    coverage_vs_classic: f64,
    coverage_vs_automated: f64,
    accuracy_fleet: f64,
    accuracy_classic: f64,
    accuracy_automated: f64,
    edge_energy_always_on: f64,
    edge_energy_autoscaled: f64,
    energy_saving: f64,
    completion_always_on: f64,
    completion_autoscaled: f64,
    completion_inflation: f64,
}

impl CropRow {
    fn new(seed: String, r: &CropRun) -> Self {
        Self {
            seed,
            steps_single: r.steps_single,
            steps_fleet: r.steps_fleet,
            speedup: r.speedup(),
            coverage_fleet: r.coverage_fleet,
            coverage_classic: r.coverage_classic,
            coverage_automated: r.coverage_automated,
            coverage_vs_classic: r.coverage_vs_classic(),
            coverage_vs_automated: r.coverage_vs_automated(),
            accuracy_fleet: r.accuracy_fleet,
            accuracy_classic: r.accuracy_classic,
            accuracy_automated: r.accuracy_automated,
            edge_energy_always_on: r.energy_always_on,
            edge_energy_autoscaled: r.energy_autoscaled,
            energy_saving: r.energy_saving(),
            completion_always_on: r.completion_always_on,
            completion_autoscaled: r.completion_autoscaled,
            completion_inflation: r.completion_inflation(),
        }
    }
}

/// Per-seed runs plus their mean; ratios of the mean row are ratios of means.
#[derive(Debug, Clone, PartialEq)]
pub struct CropBench {
    pub runs: Vec<CropRun>,
    pub mean: CropRun,
}

fn bench_field(cfg: &MissionConfig, s: usize) -> Result<ExecutionContext, CliError> {
    let files = &cfg.contexts.runtime;
    if files.is_empty() {
        let seed = sub_seed(cfg.seed, stream::BENCH_FIELD + s as u64);
        return Ok(fleet_core::apps::crop::gen_field_with(cfg.field.width, cfg.field.height, &cfg.field.params, seed)?);
    }
    let p = &files[s % files.len()];
    load_context(p).map_err(|e| CliError::input(format!("contexts.runtime {}", p.display()), e))
}

fn edge_energy(
    fleet: &FleetSpec<f64>,
    ctx: &ExecutionContext,
    models: &[ModelEnsemble<f64>],
    policy: &Policy,
    edge: &EdgeConfig,
    autoscale: bool,
    seed: u64,
) -> Result<(f64, f64), CliError> {
    let cfg = EdgeConfig { autoscale, ..edge.clone() };
    let mut rt = cfg.build();
    let hook = EdgeHook { runtime: &mut rt, config: &cfg };
    let out = run_mission(fleet, ctx, models, &policy.spec, &MissionOptions::default(), Some(hook), seed)?;
    Ok((out.report.metric(metric::EDGE_ENERGY)?, out.report.metric(metric::COMPLETION)?))
}

fn crop_seed(cfg: &MissionConfig, policy: &Policy, s: usize) -> Result<CropRun, CliError> {
    let single = setup::crop_fleet(cfg, 1)?;
    let fleet = setup::crop_fleet(cfg, cfg.agents)?;
    let ctx = bench_field(cfg, s)?;
    let seed = sub_seed(cfg.seed, stream::BENCH + s as u64);
    let models = [ModelEnsemble::single(policy.base.clone())];
    let opts = MissionOptions::default();
    let one = run_mission(&single, &ctx, &models, &policy.spec, &opts, None, seed)?.report;
    let many = run_mission(&fleet, &ctx, &models, &policy.spec, &opts, None, seed)?.report;
    let classic = baseline_classic_rl(&single, &ctx, &models, seed)?.report;
    let auto = baseline_automated(&single, &ctx, AutomatedStop::Goals)?;
    let (energy_always_on, completion_always_on) = edge_energy(&fleet, &ctx, &models, policy, &cfg.edge, false, seed)?;
    let (energy_autoscaled, completion_autoscaled) = edge_energy(&fleet, &ctx, &models, policy, &cfg.edge, true, seed)?;
    Ok(CropRun {
        steps_single: one.metric(metric::STEPS)?,
        steps_fleet: many.metric(metric::STEPS)?,
        coverage_fleet: one.metric(metric::COVERAGE)?,
        coverage_classic: classic.metric(metric::COVERAGE)?,
        coverage_automated: auto.metric(metric::COVERAGE)?,
        accuracy_fleet: one.metric(metric::ACCURACY)?,
        accuracy_classic: classic.metric(metric::ACCURACY)?,
        accuracy_automated: auto.metric(metric::ACCURACY)?,
        energy_always_on,
        energy_autoscaled,
        completion_always_on,
        completion_autoscaled,
    })
}

/// The configured reward, or one shaped on a single agent so that the
/// single-agent runs and the baselines share its footing.
pub fn bench_policy(cfg: &MissionConfig) -> Result<Policy, CliError> {
    match setup::configured_policy(cfg)? {
        Some(p) => Ok(p),
        None => Ok(shape_crop(cfg, &setup::crop_fleet(cfg, 1)?)?.policy()),
    }
}

pub fn crop_bench(cfg: &MissionConfig, policy: &Policy, pool: &rayon::ThreadPool) -> Result<CropBench, CliError> {
    let runs = pool.install(|| (0..cfg.seeds).into_par_iter().map(|s| crop_seed(cfg, policy, s)).collect::<Result<Vec<_>, _>>())?;
    let mean = CropRun::mean(&runs);
    Ok(CropBench { runs, mean })
}

/// Per-seed day recalls and their per-day means.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraBench {
    pub runs: Vec<Vec<DayRecall>>,
    pub retrained: Vec<f64>,
    pub frozen: Vec<f64>,
}

pub fn camera_bench(cfg: &MissionConfig, pool: &rayon::ThreadPool) -> Result<CameraBench, CliError> {
    let goals = setup::camera_goals(cfg)?;
    let settings = cfg.camera.tracking();
    let runs = pool.install(|| {
        (0..cfg.seeds)
            .into_par_iter()
            .map(|s| {
                let seed = sub_seed(cfg.seed, stream::BENCH + s as u64);
                let ds = setup::trajectories(cfg, seed)?;
                Ok(staleness(&ds, &goals, &settings, seed)?)
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let days = runs.iter().map(Vec::len).min().unwrap_or(0);
    let k = runs.len() as f64;
    let mean = |f: fn(&DayRecall) -> f64| (0..days).map(|d| runs.iter().map(|r| f(&r[d])).sum::<f64>() / k).collect();
    Ok(CameraBench { retrained: mean(|d| d.retrained), frozen: mean(|d| d.frozen), runs })
}

fn run_crop(cfg: &MissionConfig, outputs: &mut Outputs, pool: &rayon::ThreadPool) -> Result<String, CliError> {
    let policy = bench_policy(cfg)?;
    let bench = crop_bench(cfg, &policy, pool)?;
    let mut rows: Vec<CropRow> = bench.runs.iter().enumerate().map(|(s, r)| CropRow::new(s.to_string(), r)).collect();
    rows.push(CropRow::new("mean".into(), &bench.mean));
    outputs.csv("bench.csv", &rows)?;
    let m = &bench.mean;
    Ok(format!(
        "speedup {:.3}, coverage vs classic {:.3}, vs automated {:.3}, energy saving {:.3}, completion inflation {:.3}",
        m.speedup(),
        m.coverage_vs_classic(),
        m.coverage_vs_automated(),
        m.energy_saving(),
        m.completion_inflation()
    ))
}

fn run_camera(cfg: &MissionConfig, outputs: &mut Outputs, pool: &rayon::ThreadPool) -> Result<String, CliError> {
    let bench = camera_bench(cfg, pool)?;
    let days = bench.retrained.len();
    let mut header = vec!["seed".to_string()];
    header.extend((0..days).map(|d| format!("retrained_d{d}")));
    header.extend((0..days).map(|d| format!("frozen_d{d}")));
    let record = |seed: String, retrained: &mut dyn Iterator<Item = f64>, frozen: &mut dyn Iterator<Item = f64>| {
        let mut row = vec![seed];
        row.extend(retrained.map(|x| x.to_string()));
        row.extend(frozen.map(|x| x.to_string()));
        row
    };
    let mut rows: Vec<Vec<String>> = bench
        .runs
        .iter()
        .enumerate()
        .map(|(s, r)| {
            record(s.to_string(), &mut r[..days].iter().map(|d| d.retrained), &mut r[..days].iter().map(|d| d.frozen))
        })
        .collect();
    rows.push(record("mean".into(), &mut bench.retrained.iter().copied(), &mut bench.frozen.iter().copied()));
    outputs.table("bench.csv", &header, &rows)?;
    let last = days.saturating_sub(1);
    Ok(format!(
        "day 0 recall {:.4}; day {last} retrained {:.4}, frozen {:.4}",
        bench.retrained[0], bench.retrained[last], bench.frozen[last]
    ))
}

pub fn run(cfg: &MissionConfig, pool: &rayon::ThreadPool) -> Result<Outcome, CliError> {
    let mut outputs = Outputs::default();
    let summary = match cfg.app {
        App::Crop => run_crop(cfg, &mut outputs, pool)?,
        App::Camera => run_camera(cfg, &mut outputs, pool)?,
    };
    Ok(Outcome { outputs, goals_met: true, summary })
}
