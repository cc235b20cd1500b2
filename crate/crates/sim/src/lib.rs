//! Experiment runner for the `fvk-core` plate solver.
//!
//! A run reads a key-value configuration ([`config`]), builds the mesh and
//! problem ([`setup`]), executes the flow(s) ([`experiments`]) and writes
//! per-iteration CSVs, a per-run diagnostics CSV, VTK surfaces
//! ([`surface`]) and a `manifest.json` ([`output`]).

pub mod config;
pub mod experiments;
pub mod output;
pub mod setup;
pub mod surface;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use experiments::{Report, RunOptions};
pub use output::Manifest;
pub use surface::Surface;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("cannot set up the problem: {0}")]
    Setup(#[from] fvk_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// Process exit code: configuration and setup problems give 1.
    pub fn exit_code(&self) -> i32 {
        1
    }
}

/// Reads a configuration file and applies `key=value` overrides.
pub fn load_config(path: &Path, kind: Option<ExperimentKind>, overrides: &[String]) -> Result<ExperimentConfig, SimError> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_owned(),
        source,
    })?;
    let mut entries = config::tokenize(&text)?;
    for o in overrides {
        entries.push(config::parse_override(o)?);
    }
    Ok(ExperimentConfig::from_entries(&entries, kind)?)
}

/// Runs an experiment and writes its artifacts to `cfg.output.dir`.
/// Solver aborts do not fail the call; they are reported in the manifest.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Manifest, SimError> {
    let start = Instant::now();
    let report = experiments::execute(cfg, opts)?;
    let dir = &cfg.output.dir;
    output::write_report(dir, cfg, opts, &report, start.elapsed().as_secs_f64()).map_err(|source| SimError::Io {
        path: dir.clone(),
        source,
    })
}
