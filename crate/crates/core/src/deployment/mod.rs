//! Slot-stepped Monte Carlo simulation of energy-harvesting deployments.

mod battery;
mod config;
mod economics;
mod sim;
mod step;
mod sweep;

pub use battery::{BatteryState, Capacity};
pub use config::{DeploymentConfig, HarvestSpec};
pub use economics::{economics, optimal_density, EconomicParams, HOURS_PER_YEAR};
pub use sim::{aggregate, run_layout, run_trial, simulate, SimResult, TrialStats};
pub use step::{step_slot, ScbsNode, SlotOutcome};
pub use sweep::{sweep, CurvePoint, SweepParam, TradeoffCurve};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration `{key}`: {message}")]
    InvalidConfig { key: &'static str, message: String },
    #[error("no users were drawn in any trial; outage is undefined")]
    UndefinedOutage,
    #[error("energy conservation violated (relative error {0:e})")]
    Conservation(f64),
    #[error("sweep values must be non-empty and ascending")]
    BadSweep,
    #[error("tradeoff curve is empty")]
    EmptyCurve,
}
