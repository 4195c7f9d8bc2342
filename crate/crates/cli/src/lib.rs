//! Library behind the `fleetsim` binary: config loading, setup helpers and
//! the shape, run, campaign and bench commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod setup;

pub use config::{App, Baseline, MissionConfig, Overrides};
pub use error::CliError;
pub use output::{Outcome, Outputs};
