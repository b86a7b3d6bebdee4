//! Renewable generation traces and per-slot energy-arrival models.

pub mod catalog;
mod harvester;
mod trace;

pub use harvester::HarvesterModel;
pub use trace::{
    complementarity, load_trace, normalize_peak, parse_timestamp, resample_average, ColumnSpec, EnergyTrace,
    LoadedTrace,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o error reading trace: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: timestamp is not strictly after the previous record")]
    Ordering { line: usize },
    #[error("line {line}: gap of {gap_s} s is not a multiple of the inferred resolution {resolution_s} s")]
    IrregularSpacing { line: usize, gap_s: i64, resolution_s: u64 },
    #[error("need at least 2 records, found {found}")]
    InsufficientData { found: usize },
    #[error("alignment error: {0}")]
    Alignment(String),
    #[error("degenerate trace: {0}")]
    Degenerate(String),
    #[error("invalid trace: {0}")]
    Invalid(String),
}
