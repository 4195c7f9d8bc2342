//! Builds fleets, contexts, datasets and policies from a config.

use std::sync::Arc;

use fleet_core::apps::camera::{gen_trajectories_with, read_porto_csv, TrajectoryDataset};
use fleet_core::apps::crop::{drift_field, gen_field_with, CropEval, CropMap};
use fleet_core::seeds::sub_seed;
use fleet_core::shaping::ShapingResult;
use fleet_core::{load_context, metric, ExecutionContext, FleetSpec, Goals, QTable, RewardSpec};

use crate::config::MissionConfig;
use crate::error::CliError;

/// Seed streams derived from the config seed.
pub mod stream {
    pub const TRAINING: u64 = 0x100;
    pub const RUNTIME: u64 = 0x200;
    pub const DRIFT: u64 = 0x300;
    pub const BENCH: u64 = 0x400;
    pub const BENCH_FIELD: u64 = 0x500;
    pub const TRAJECTORIES: u64 = 0x600;
}

/// Reward plus the SA model agents start from.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub spec: RewardSpec<f64>,
    pub base: QTable<f64>,
}

pub fn goals(cfg: &MissionConfig) -> Result<Goals, CliError> {
    Goals::new(cfg.goals.clone()).map_err(|e| CliError::input("goals", e))
}

/// Goals for the tracking app, checked against the metrics it reports.
pub fn camera_goals(cfg: &MissionConfig) -> Result<Goals, CliError> {
    let goals = goals(cfg)?;
    goals
        .validate_against(&[metric::ACCURACY, metric::PRECISION, metric::FRAMES_SEARCHED, metric::THROUGHPUT])
        .map_err(|e| CliError::input("goals", e))?;
    Ok(goals)
}

pub fn crop_fleet(cfg: &MissionConfig, n_agents: usize) -> Result<FleetSpec<f64>, CliError> {
    let mut fleet = FleetSpec::new(n_agents, Arc::new(CropMap::default()), Arc::new(CropEval), goals(cfg)?);
    fleet.costs = cfg.costs;
    fleet.energy = cfg.energy;
    fleet.learning = cfg.learning.clone();
    fleet.tiling = cfg.tiling;
    fleet.validate().map_err(|e| CliError::input("fleet", e))?;
    Ok(fleet)
}

fn load_all(paths: &[std::path::PathBuf], field: &str) -> Result<Vec<ExecutionContext>, CliError> {
    paths
        .iter()
        .map(|p| load_context(p).map_err(|e| CliError::input(format!("{field} {}", p.display()), e)))
        .collect()
}

pub fn training_fields(cfg: &MissionConfig) -> Result<Vec<ExecutionContext>, CliError> {
    if !cfg.contexts.training.is_empty() {
        return load_all(&cfg.contexts.training, "contexts.training");
    }
    if cfg.field.training == 0 {
        return Err(CliError::Config("field.training: no training contexts given or generated".into()));
    }
    (0..cfg.field.training as u64)
        .map(|i| generated(cfg, sub_seed(cfg.seed, stream::TRAINING + i)))
        .collect()
}

fn generated(cfg: &MissionConfig, seed: u64) -> Result<ExecutionContext, CliError> {
    Ok(gen_field_with(cfg.field.width, cfg.field.height, &cfg.field.params, seed)?)
}

/// The field a single mission flies: the first runtime file or a generated one.
pub fn runtime_field(cfg: &MissionConfig, seed: u64) -> Result<ExecutionContext, CliError> {
    match cfg.contexts.runtime.first() {
        Some(_) => Ok(load_all(&cfg.contexts.runtime[..1], "contexts.runtime")?.remove(0)),
        None => generated(cfg, sub_seed(seed, stream::RUNTIME)),
    }
}

/// Campaign contexts: the runtime files, or a generated field drifting a
/// little further before every mission.
pub fn field_family(cfg: &MissionConfig, seed: u64, n: usize) -> Result<Vec<ExecutionContext>, CliError> {
    if !cfg.contexts.runtime.is_empty() {
        return load_all(&cfg.contexts.runtime, "contexts.runtime");
    }
    let mut fields = vec![runtime_field(cfg, seed)?];
    for i in 1..n {
        let next = drift_field(&fields[i - 1], &cfg.field.params, cfg.field.drift, sub_seed(seed, stream::DRIFT + i as u64))?;
        fields.push(next);
    }
    Ok(fields)
}

pub fn base_model(cfg: &MissionConfig) -> Result<QTable<f64>, CliError> {
    match &cfg.model {
        None => Ok(QTable::new()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::input(format!("model {}", p.display()), e))?;
            QTable::from_json(&text).map_err(|e| CliError::input(format!("model {}", p.display()), e))
        }
    }
}

/// The reward named by the config, if any.
pub fn configured_policy(cfg: &MissionConfig) -> Result<Option<Policy>, CliError> {
    let spec = match (&cfg.reward, &cfg.shaping_result) {
        (Some(r), _) => r.clone(),
        (None, Some(p)) => {
            let what = format!("shaping_result {}", p.display());
            let text = std::fs::read_to_string(p).map_err(|e| CliError::input(&what, e))?;
            ShapingResult::<f64>::from_json(&text).map_err(|e| CliError::input(&what, e))?.spec()
        }
        (None, None) => return Ok(None),
    };
    Ok(Some(Policy { spec, base: base_model(cfg)? }))
}

pub fn required_policy(cfg: &MissionConfig) -> Result<Policy, CliError> {
    configured_policy(cfg)?
        .ok_or_else(|| CliError::Config("reward: give `reward` or `shaping_result` (run `shape` first)".into()))
}

pub fn trajectories(cfg: &MissionConfig, seed: u64) -> Result<TrajectoryDataset, CliError> {
    let c = &cfg.camera;
    match &c.porto_csv {
        Some(p) => {
            let what = format!("camera.porto_csv {}", p.display());
            let file = std::fs::File::open(p).map_err(|e| CliError::input(&what, e))?;
            read_porto_csv(std::io::BufReader::new(file), c.cameras).map_err(|e| CliError::input(&what, e))
        }
        None => Ok(gen_trajectories_with(c.cameras, c.targets, c.days, c.drift, &c.walk, sub_seed(seed, stream::TRAJECTORIES))?),
    }
}

/// Worker pool capped by `FLEETSIM_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("FLEETSIM_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("FLEETSIM_THREADS: expected a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Runtime(e.to_string()))
}
