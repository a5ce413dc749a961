//! Batch front end for the rate sweeps: JSON config in, CSV records and a
//! JSON summary out.

pub mod config;
pub mod runner;

use std::path::Path;

pub use config::{ExperimentConfig, Mode, ResolvedConfig};
pub use runner::{run, write_outputs, RunOutcome, Summary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] otrates_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => runner::EXIT_VALIDATION,
            // Core errors at this stage come from values the config supplied.
            CliError::Core(_) => runner::EXIT_VALIDATION,
            CliError::Io(_) => 1,
        }
    }
}

/// Resolves, runs and writes one experiment. The outcome carries the exit
/// code that the run maps to.
pub fn run_config(config: &ExperimentConfig, mode: Mode, quick: bool, out: &Path) -> Result<RunOutcome, CliError> {
    let resolved = config.resolve(mode, quick)?;
    let outcome = run(&resolved)?;
    write_outputs(&outcome, out)?;
    Ok(outcome)
}
