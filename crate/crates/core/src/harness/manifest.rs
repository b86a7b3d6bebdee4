use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deployment::SweepParam;
use crate::energy::ColumnSpec;

use super::config::{lenient_reals, ExperimentConfig, Panel};
use super::scenario_file::ScenarioFile;
use super::{Format, HarnessError, Solver};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// An input file together with the digest it had when the run started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<(Self, Vec<u8>), HarnessError> {
        let bytes = std::fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        Ok((Self { path: path.to_path_buf(), sha256: sha256_hex(&bytes) }, bytes))
    }

    pub fn verify(&self) -> Result<(), HarnessError> {
        let (now, _) = Self::read(&self.path)?;
        if now.sha256 != self.sha256 {
            return Err(HarnessError::ReplayMismatch {
                file: self.path.display().to_string(),
                expected: self.sha256.clone(),
                actual: now.sha256,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomSweep {
    pub param: SweepParam,
    #[serde(with = "lenient_reals")]
    pub values: Vec<f64>,
}

/// Everything needed to recompute a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    Profile { traces: Vec<InputFile>, columns: ColumnSpec, window_s: Option<u64>, normalize: bool },
    Deploy { config: ExperimentConfig, panels: Vec<Panel>, custom: Option<CustomSweep>, inputs: Vec<InputFile> },
    Operate { scenario: ScenarioFile, solvers: Vec<Solver>, tolerance: f64 },
    Oracle { scenario: ScenarioFile },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub format: Format,
    pub invocation: Invocation,
    pub seed: Option<u64>,
    pub started_utc: String,
    pub finished_utc: String,
    pub outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config { path: path.to_path_buf(), message: e.to_string() })
    }
}

pub fn tool_version() -> String {
    format!("ehscn {}", env!("CARGO_PKG_VERSION"))
}
