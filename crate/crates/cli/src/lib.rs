//! Experiment runner around `proxgen-core`: resolves flat key-value
//! configuration files into run grids, executes the grid cells (in parallel
//! when asked), and writes machine-readable CSV results.

use std::fmt;
use std::io;
use std::path::PathBuf;

pub mod config;
pub mod csvio;
pub mod dataset_io;
pub mod experiments;
pub mod pool;

pub use config::{Experiment, ExperimentConfig, Init};
pub use experiments::{run_experiment, ExperimentOutcome};

/// Errors surfaced to the command line. Configuration problems exit with
/// code 1; cell failures inside a grid never raise them (the grid keeps
/// going and the process exits with code 2 instead).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io { path: PathBuf, source: io::Error },
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Io { path, source } => {
                write!(f, "i/o error on {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<proxgen_core::CoreError> for CliError {
    fn from(e: proxgen_core::CoreError) -> Self {
        CliError::Config(e.to_string())
    }
}
