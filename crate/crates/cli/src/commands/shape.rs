use fleet_core::apps::camera::{build_correlations, tune_thresholds, DayQueries, ThresholdTuning};
use fleet_core::shaping::{build_reward, retrain_sa, BoSettings, CandidateSource, ShapingResult};
use fleet_core::{FleetSpec, QTable};

use crate::config::{App, MissionConfig};
use crate::error::CliError;
use crate::output::{Outcome, Outputs};
use crate::setup::{self, Policy};

/// Shaped reward plus the SA model refined under it.
#[derive(Debug, Clone)]
pub struct Shaped {
    pub result: ShapingResult<f64>,
    pub model: QTable<f64>,
}

impl Shaped {
    pub fn policy(&self) -> Policy {
        Policy { spec: self.result.spec(), base: self.model.clone() }
    }
}

/// Searches the reward on the training fields with `fleet`, then refines
/// the configured base model under the winning reward.
pub fn shape_crop(cfg: &MissionConfig, fleet: &FleetSpec<f64>) -> Result<Shaped, CliError> {
    let training = setup::training_fields(cfg)?;
    let base = setup::base_model(cfg)?;
    let settings = BoSettings { n_candidates: cfg.shaping.candidates, ..BoSettings::default() }.with_epochs(cfg.shaping.epochs);
    let result = build_reward(&training, fleet, &base, &settings, &CandidateSource::Random, &fleet.goals, cfg.seed)?;
    let model = if cfg.shaping.retrain_episodes == 0 {
        base
    } else {
        retrain_sa(fleet, &base, &training, &result.spec(), cfg.shaping.retrain_episodes, cfg.seed.wrapping_add(1))?
    };
    Ok(Shaped { result, model })
}

/// Tunes the pruning thresholds on day 0 of the dataset.
pub fn shape_camera(cfg: &MissionConfig) -> Result<ThresholdTuning, CliError> {
    let goals = setup::camera_goals(cfg)?;
    let ds = setup::trajectories(cfg, cfg.seed)?;
    let t = cfg.camera.tracking();
    let n = ds.grid.n_cameras;
    let model = build_correlations(ds.day(0), n, t.window)?;
    let queries = DayQueries::new(ds.day(0), n, t.window)?;
    let bo = BoSettings::default().with_epochs(t.tuning_epochs);
    Ok(tune_thresholds(&model, &queries, &goals, t.frame_cost, &bo, cfg.seed)?)
}

pub fn run(cfg: &MissionConfig) -> Result<Outcome, CliError> {
    let mut outputs = Outputs::default();
    match cfg.app {
        App::Crop => {
            let fleet = setup::crop_fleet(cfg, cfg.agents)?;
            let shaped = shape_crop(cfg, &fleet)?;
            let r = &shaped.result;
            outputs.bytes("shaping_result.json", (r.to_json()? + "\n").into_bytes());
            let mut loss = Vec::new();
            r.write_loss_csv(&mut loss)?;
            outputs.bytes("shaping_loss.csv", loss);
            outputs.bytes("sa_model.json", (shaped.model.to_json()? + "\n").into_bytes());
            Ok(Outcome {
                outputs,
                goals_met: r.goals_met,
                summary: format!(
                    "weights {:?} t_u {:.4} t_v {} loss {:.4} goals met {}",
                    r.weights, r.t_u, r.t_v, r.best_loss, r.goals_met
                ),
            })
        }
        App::Camera => {
            let tuned = shape_camera(cfg)?;
            outputs.json("shaping_result.json", &tuned)?;
            let rows: Vec<_> = tuned.history.iter().map(|h| (h.epoch, h.loss, h.goals_met)).collect();
            outputs.table(
                "shaping_loss.csv",
                &["epoch".into(), "loss".into(), "goals_met".into()],
                &rows.iter().map(|(e, l, g)| vec![e.to_string(), l.to_string(), g.to_string()]).collect::<Vec<_>>(),
            )?;
            Ok(Outcome {
                outputs,
                goals_met: tuned.goals_met,
                summary: format!(
                    "spatial {:.4} temporal {:.4} loss {:.4} goals met {}",
                    tuned.spatial, tuned.temporal, tuned.best_loss, tuned.goals_met
                ),
            })
        }
    }
}
