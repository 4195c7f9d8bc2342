//! Offline construction of the reward and gate thresholds by Bayesian
//! optimization over simulated missions.

pub mod acquisition;
pub mod bo;
pub mod gp;
mod loss;

pub use acquisition::{ei_gaussian, expected_improvement, propose_next};
pub use bo::{minimize, BoRun, BoSettings, CandidatePool, Trial};
pub use gp::{gp_fit, KernelParams, Surrogate};
pub use loss::loss;
mod build;

pub use build::{build_reward, evaluate_spec, retrain_sa, CandidateSource, EpochRecord, ShapingResult};
