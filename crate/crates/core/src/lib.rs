//! Swarm programming model: grid worlds, Q-learning State-to-Action models
//! gated by a History-to-Action model, Bayesian reward shaping, online
//! ensembles and the mission driver, plus two benchmark applications.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the bottom of this module fix the common `f64` instantiations.

pub mod apps;
pub mod context;
pub mod error;
pub mod features;
pub mod fleetspec;
pub mod goals;
pub mod grid;
pub mod mission;
pub mod models;
pub mod online;
pub mod scalar;
pub mod seeds;
pub mod shaping;

pub use context::{load_context, ExecutionContext};
pub use error::{FleetError, Result};
pub use features::{normalize_features, FeatureSpace, StateSpaceVector};
pub use fleetspec::{ContextSplits, CostWeights, EnergyCosts, EvalFn, FleetSpec, MapFn, Perf};
pub use goals::{metric, Comparator, EvalReport, Goal, Goals};
pub use grid::{group_of, valid_actions, ActionId, GridDims, StateGroupId, StateId, Tiling};
pub use models::{
    ensemble_select, ha_gate, q_update, reward, select_action, GateDecision, LearningParams, ModelEnsemble, QTable,
    RewardSpec,
};
pub use scalar::Real;

pub type QTable64 = QTable<f64>;
pub type RewardSpec64 = RewardSpec<f64>;
pub type LearningParams64 = LearningParams<f64>;
pub type ModelEnsemble64 = ModelEnsemble<f64>;
pub type FleetSpec64 = FleetSpec<f64>;
pub type FeatureSpace64 = FeatureSpace<f64>;
