use std::path::{Path, PathBuf};

use fleet_core::apps::camera::{TrackingSettings, WalkParams};
use fleet_core::apps::crop::FieldParams;
use fleet_core::mission::EdgeConfig;
use fleet_core::online::AggregationMode;
use fleet_core::{metric, CostWeights, EnergyCosts, Goal, LearningParams, RewardSpec, Tiling};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum App {
    Crop,
    Camera,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Automated,
    Classic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldConfig {
    pub width: usize,
    pub height: usize,
    #[serde(flatten)]
    pub params: FieldParams,
    /// Generated training fields when no context files are given.
    pub training: usize,
    /// Per-mission drift of the campaign field family.
    pub drift: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self { width: 24, height: 24, params: FieldParams::default(), training: 3, drift: 0.1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextFiles {
    pub training: Vec<PathBuf>,
    pub runtime: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapingConfig {
    pub epochs: usize,
    pub candidates: usize,
    /// Exploring missions per training context used to refine the SA model
    /// after shaping; 0 keeps the base model.
    pub retrain_episodes: usize,
}

impl Default for ShapingConfig {
    fn default() -> Self {
        Self { epochs: 30, candidates: 256, retrain_episodes: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSettings {
    pub sweeps: usize,
    pub weight_search_epochs: usize,
    pub aggregation: Option<AggregationMode>,
}

impl Default for CampaignSettings {
    fn default() -> Self {
        Self { sweeps: 1, weight_search_epochs: 8, aggregation: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraConfig {
    pub cameras: usize,
    pub targets: usize,
    pub days: usize,
    /// Corridor rotation per day, in radians.
    pub drift: f64,
    pub window: u32,
    pub frame_cost: f64,
    pub tuning_epochs: usize,
    pub walk: WalkParams,
    /// Porto-style `target_id,timestamp,lon,lat` file replacing the generator.
    pub porto_csv: Option<PathBuf>,
}

impl Default for CameraConfig {
    fn default() -> Self {
        let t = TrackingSettings::default();
        Self {
            cameras: 64,
            targets: 3000,
            days: 15,
            drift: 0.1,
            window: t.window,
            frame_cost: t.frame_cost,
            tuning_epochs: t.tuning_epochs,
            walk: WalkParams::default(),
            porto_csv: None,
        }
    }
}

impl CameraConfig {
    pub fn tracking(&self) -> TrackingSettings {
        TrackingSettings { window: self.window, frame_cost: self.frame_cost, tuning_epochs: self.tuning_epochs }
    }
}

/// One experiment bundle: the FleetSpec fields plus app, generator,
/// cluster and output settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionConfig {
    pub app: App,
    pub agents: usize,
    pub seed: u64,
    pub seeds: usize,
    pub missions: usize,
    pub online: bool,
    pub cluster: bool,
    pub baseline: Option<Baseline>,
    pub out: PathBuf,
    pub goals: Vec<Goal>,
    pub costs: CostWeights,
    pub energy: EnergyCosts,
    pub learning: LearningParams<f64>,
    pub tiling: Tiling,
    pub field: FieldConfig,
    pub contexts: ContextFiles,
    pub shaping: ShapingConfig,
    /// Explicit reward; otherwise read from `shaping_result`.
    pub reward: Option<RewardSpec<f64>>,
    pub shaping_result: Option<PathBuf>,
    /// Q-table JSON used as the SA model.
    pub model: Option<PathBuf>,
    pub campaign: CampaignSettings,
    pub edge: EdgeConfig,
    pub camera: CameraConfig,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            app: App::Crop,
            agents: 4,
            seed: 0,
            seeds: 10,
            missions: 10,
            online: true,
            cluster: false,
            baseline: None,
            out: PathBuf::from("fleet-out"),
            goals: vec![Goal::at_least(metric::ACCURACY, 0.7)],
            costs: CostWeights { steps: 0.1, ..CostWeights::default() },
            energy: EnergyCosts::default(),
            learning: LearningParams::default(),
            tiling: Tiling::default(),
            field: FieldConfig::default(),
            contexts: ContextFiles::default(),
            shaping: ShapingConfig::default(),
            reward: None,
            shaping_result: None,
            model: None,
            campaign: CampaignSettings::default(),
            edge: EdgeConfig::default(),
            camera: CameraConfig::default(),
        }
    }
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub seeds: Option<usize>,
    pub agents: Option<usize>,
    pub missions: Option<usize>,
    pub online: Option<bool>,
    pub baseline: Option<Baseline>,
    pub app: Option<App>,
    pub cluster: Option<bool>,
    pub out: Option<PathBuf>,
}

fn field_err(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config(format!("{field}: {}", message.into()))
}

impl MissionConfig {
    /// Parses a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.contexts.training.iter_mut().for_each(resolve);
        cfg.contexts.runtime.iter_mut().for_each(resolve);
        cfg.shaping_result.iter_mut().for_each(resolve);
        cfg.model.iter_mut().for_each(resolve);
        cfg.camera.porto_csv.iter_mut().for_each(resolve);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.seeds {
            self.seeds = v;
        }
        if let Some(v) = o.agents {
            self.agents = v;
        }
        if let Some(v) = o.missions {
            self.missions = v;
        }
        if let Some(v) = o.online {
            self.online = v;
        }
        if o.baseline.is_some() {
            self.baseline = o.baseline;
        }
        if let Some(v) = o.app {
            self.app = v;
        }
        if let Some(v) = o.cluster {
            self.cluster = v;
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
    }

    /// Field-level checks that do not need any simulation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.agents == 0 {
            return Err(field_err("agents", "must be at least 1"));
        }
        if self.seeds == 0 {
            return Err(field_err("seeds", "must be at least 1"));
        }
        if self.missions == 0 {
            return Err(field_err("missions", "must be at least 1"));
        }
        if let Some(g) = self.goals.iter().find(|g| !g.target.is_finite()) {
            return Err(field_err("goals", format!("target of `{}` is not finite", g.metric)));
        }
        if self.field.width == 0 || self.field.height == 0 {
            return Err(field_err("field", "width and height must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.field.drift) {
            return Err(field_err("field.drift", "must lie in [0, 1]"));
        }
        if self.tiling.tile_width == 0 || self.tiling.tile_height == 0 {
            return Err(field_err("tiling", "tiles must be non-empty"));
        }
        self.learning.validate().map_err(|e| field_err("learning", e.to_string()))?;
        if let Some(r) = &self.reward {
            r.validate().map_err(|e| field_err("reward", e.to_string()))?;
        }
        if self.shaping.epochs == 0 || self.shaping.candidates == 0 {
            return Err(field_err("shaping", "epochs and candidates must be at least 1"));
        }
        if self.campaign.weight_search_epochs == 0 {
            return Err(field_err("campaign.weight_search_epochs", "must be at least 1"));
        }
        let c = &self.camera;
        if c.cameras == 0 || c.targets == 0 || c.days == 0 {
            return Err(field_err("camera", "cameras, targets and days must be at least 1"));
        }
        if !(0.0..=1.0).contains(&c.drift) {
            return Err(field_err("camera.drift", "must lie in [0, 1]"));
        }
        if c.window < 2 {
            return Err(field_err("camera.window", "must be at least 2 minutes"));
        }
        if c.tuning_epochs == 0 {
            return Err(field_err("camera.tuning_epochs", "must be at least 1"));
        }
        let files = self
            .contexts
            .training
            .iter()
            .map(|p| ("contexts.training", p))
            .chain(self.contexts.runtime.iter().map(|p| ("contexts.runtime", p)))
            .chain(self.shaping_result.iter().map(|p| ("shaping_result", p)))
            .chain(self.model.iter().map(|p| ("model", p)))
            .chain(c.porto_csv.iter().map(|p| ("camera.porto_csv", p)));
        for (field, p) in files {
            if !p.is_file() {
                return Err(field_err(field, format!("{} does not exist", p.display())));
            }
        }
        Ok(())
    }
}
