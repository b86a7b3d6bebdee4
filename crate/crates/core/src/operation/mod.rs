//! Solvers over a fixed deployed instance.
//!
//! Two problems are covered. For off-grid networks, users are associated
//! and powered to maximize the minimum time-averaged SNR
//! ([`maxmin_bisection`], with [`baseline_distance`],
//! [`baseline_snr_greedy`] and the pooled-energy upper bound
//! [`distributed_bf_bound`]). For a single user next to one grid-powered
//! station, the grid energy is minimized by [`save_transmit`] or
//! [`greedy_transmit`] and checked by [`grid_optimality_oracle`].

mod baselines;
mod bound;
mod feasibility;
mod grid;
mod maxmin;
mod scenario;
mod schedule;

pub use baselines::{baseline_distance, baseline_snr_greedy};
pub use bound::{distributed_bf_bound, BOUND_ROUNDING};
pub use feasibility::{assign_slot, feasibility};
pub use grid::{
    compare_grid_strategies, greedy_transmit, grid_optimality_oracle, save_transmit, ORACLE_MAX_HORIZON,
    ORACLE_MAX_SCBS,
};
pub use maxmin::{maxmin_bisection, DEFAULT_TOLERANCE};
pub use scenario::{Scenario, ScenarioScbs};
pub use schedule::{covers, evaluate_grid_energy, evaluate_min_avg_snr, Assignment, EnergyLedger, Schedule};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("solver does not apply to this scenario: {0}")]
    Unsupported(String),
    #[error("the grid-powered SCBS cannot reach the user within its power cap")]
    GridInfeasible,
    #[error("instance too large for exhaustive search (T = {horizon}, M = {scbs})")]
    InstanceTooLarge { horizon: usize, scbs: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("achieved value {value} exceeds the upper bound {bound}")]
    BoundViolation { value: f64, bound: f64 },
    #[error("save-transmit uses {save} J of grid energy but greedy-transmit uses {greedy} J")]
    StrategyMismatch { save: f64, greedy: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Objective {
    /// Minimum over users of the time-averaged linear SNR.
    #[serde(rename = "min_avg_snr")]
    MinAvgSnr(f64),
    #[serde(rename = "grid_energy_J")]
    GridEnergyJ(f64),
}

impl Objective {
    pub fn value(&self) -> f64 {
        match self {
            Self::MinAvgSnr(v) | Self::GridEnergyJ(v) => *v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SolveMeta {
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper_bound: Option<f64>,
    /// Set when a baseline schedule beat the bisection witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_slot: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_slots: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub solver: &'static str,
    #[serde(flatten)]
    pub objective: Objective,
    pub meta: SolveMeta,
    #[serde(skip)]
    pub schedule: Schedule,
}
