//! Scenario files in, CSV/JSON artifacts out.
//!
//! A scenario is a JSON document (see [`config::ScenarioConfig`]) describing
//! modes, a switching signal and the parameters of the analysis commands.
//! [`run`] validates it, applies command-line overrides and writes the
//! artifacts of one [`Command`] into an output directory.

pub mod build;
pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use thiserror::Error;

use omega_core::OmegaError;

pub use config::{ConfigError, Diagnostic, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Trajectory, switch events and outputs as CSV.
    Simulate,
    /// Common-space embedding and its equivalence check.
    Embed,
    /// Dwell-time bound.
    Dwell,
    /// Per-mode and pairwise partial controllability.
    Ctrb,
    /// Per-mode observability through the output.
    Obs,
    /// Shortest controllable chain between two modes.
    Chain,
    /// Reduced models plus the error table.
    Reduce,
    /// Error table only.
    Approx,
    /// Nominal-versus-member aggregation runs.
    Aggregate,
    /// Canonical forms, distances, angles and projections of points.
    ReduceVec,
    /// Divisor lattice of the given dimensions.
    Lattice,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid scenario:\n{0}")]
    Config(ConfigError),
    #[error("{0}")]
    Numeric(OmegaError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// 2 for scenario problems, 3 for numeric failures, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<OmegaError> for CliError {
    fn from(e: OmegaError) -> Self {
        match e {
            OmegaError::InvalidArgument(msg) => {
                CliError::Config(ConfigError::single("scenario", msg))
            }
            numeric => CliError::Numeric(numeric),
        }
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    /// Replaces the seed of a random signal and of a uniform reduction matrix.
    pub seed: Option<u64>,
    pub step: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(s) = self.seed {
            if let Some(config::SignalConfig::Random { seed, .. }) = &mut cfg.signal {
                *seed = s;
            }
            if let Some(r) = &mut cfg.reduction {
                if let config::MatrixSource::Uniform { seed, .. } = &mut r.matrix {
                    *seed = s;
                }
            }
        }
        if let Some(h) = self.step {
            cfg.step = Some(h);
        }
    }
}

/// Loads `config`, applies `overrides` and runs `command` into `out`.
pub fn run(
    command: Command,
    config: &Path,
    out: &Path,
    overrides: Overrides,
) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = ScenarioConfig::load(config).map_err(CliError::Config)?;
    overrides.apply(&mut cfg);
    commands::run(command, &cfg.normalized(), out)
}
