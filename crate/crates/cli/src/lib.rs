//! Scenario runner for the supervision-wage model: reads a JSON scenario,
//! runs the matching solver and writes CSV, JSON and SVG artifacts.

pub mod commands;
pub mod config;
pub mod reproduce;
pub mod svg;

use std::path::{Path, PathBuf};

use supervision_wage::ModelError;

pub use commands::{execute, write_artifacts, Artifact, ArtifactKind, Format};
pub use config::{load_config, parse_config, validate_config, Command, ConfigError, ConfigIssue, Scenario};
pub use reproduce::{reproduce_all, ReproduceReport};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver error: {0}")]
    Model(#[from] ModelError),
    #[error("cannot write outputs: {0}")]
    Io(#[from] std::io::Error),
}

/// Validates `config`, runs `command` and writes its artifacts into `out`.
pub fn run_scenario(
    command: Command,
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    format: Format,
) -> Result<Vec<PathBuf>, RunError> {
    let mut scenario = load_config(config, Some(command))?;
    if let Some(seed) = seed {
        scenario.simulation.seed = seed;
    }
    let artifacts = execute(&scenario)?;
    Ok(write_artifacts(out, &artifacts, format)?)
}
