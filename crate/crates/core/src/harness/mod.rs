//! Configuration files, experiment commands and run manifests behind the
//! `ehscn` binary.
//!
//! Each command is captured as an [`Invocation`] that holds the fully
//! resolved inputs. [`run`] executes it, writes the outputs and a
//! `manifest.json` with their SHA-256 digests, and [`replay`] re-executes a
//! manifest and checks the digests.

mod commands;
mod config;
mod manifest;
mod scenario_file;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::deployment::SimError;
use crate::energy::TraceError;
use crate::operation::SolveError;

pub use commands::{
    deploy_invocation, operate_invocation, profile_invocation, replay, run, solve, Format, Outcome, RunOptions, Solver,
};
pub use config::{
    BatterySection, ExperimentConfig, HarvestKind, HarvestSection, NetworkSection, Panel, RegionSection,
    SimulationSection, SweepSection, CALIBRATED_GAMMA_TH, DEFAULT_ARRIVAL_PROB,
};
pub use manifest::{
    sha256_hex, tool_version, CustomSweep, InputFile, Invocation, OutputDigest, RunManifest, MANIFEST_FILE,
};
pub use scenario_file::{ScbsEntry, ScenarioFile};

/// Overrides the default output directory.
pub const OUT_DIR_ENV: &str = "EHSCN_OUT_DIR";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Trace { path: PathBuf, source: TraceError },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("{0}")]
    Usage(String),
    #[error("runtime check failed: {0}")]
    Assertion(String),
    #[error("replay mismatch for {file}: recorded {expected}, got {actual}")]
    ReplayMismatch { file: String, expected: String, actual: String },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// 2 for bad input or a solver that does not fit the scenario, 1 for
    /// everything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. }
            | Self::Usage(_)
            | Self::Sim(SimError::InvalidConfig { .. } | SimError::BadSweep)
            | Self::Solve(
                SolveError::InvalidScenario(_)
                | SolveError::Unsupported(_)
                | SolveError::InstanceTooLarge { .. }
                | SolveError::InvalidTolerance(_),
            ) => 2,
            _ => 1,
        }
    }
}

/// Output directory: the explicit flag, else the environment variable,
/// else `./out`.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"))
}
