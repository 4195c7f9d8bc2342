use std::process::ExitCode;

use fleet_core::FleetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("goals unmet: {0}")]
    GoalsUnmet(String),
    #[error("runtime invariant violated: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::GoalsUnmet(_) => 3,
            CliError::Runtime(_) => 4,
        })
    }

    /// Wraps an error raised while reading user-supplied inputs.
    pub fn input(what: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{what}: {e}"))
    }
}

impl From<FleetError> for CliError {
    fn from(e: FleetError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io: {e}"))
    }
}
