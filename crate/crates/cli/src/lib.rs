//! Library side of the `fracdyn` command-line tool.

pub mod commands;
pub mod config;
pub mod output;
pub mod registry;

use thiserror::Error;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "FRACDYN_SEED";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical failure: non-finite {stage} value at step {step} (t = {time})")]
    Numerical { step: usize, time: f64, stage: &'static str },
}

impl CliError {
    /// 2 for usage, configuration and I/O problems, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }
}

/// The seed from [`SEED_ENV`] when set, else `configured`.
pub fn effective_seed(configured: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Config(format!("{SEED_ENV}=`{s}` is not an integer"))),
        Err(_) => Ok(configured),
    }
}
