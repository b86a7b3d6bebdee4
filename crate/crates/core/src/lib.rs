//! Simulation and optimization toolkit for energy-harvesting small-cell
//! networks.
//!
//! The crate is organised by subsystem:
//!
//! - [`energy`]: renewable generation traces and per-slot harvest models.
//! - [`spatial`]: Poisson deployments, nearest-cell association and the
//!   power needed to meet a receive-SNR target.
//! - [`deployment`]: slot-stepped Monte Carlo simulation of whole
//!   deployments and the tradeoff sweeps built on it.
//! - [`operation`]: solvers for a fixed deployed instance (max-min SNR
//!   association and grid-power minimization).
//! - [`harness`]: file formats, manifests and the command implementations
//!   used by the `ehscn` binary.

pub mod deployment;
pub mod energy;
pub mod harness;
pub mod numfmt;
pub mod operation;
pub mod rng;
pub mod spatial;

pub use deployment::{
    simulate, step_slot, sweep, BatteryState, Capacity, DeploymentConfig, HarvestSpec, ScbsNode, SimError, SimResult,
    SlotOutcome, SweepParam, TradeoffCurve,
};
pub use energy::{EnergyTrace, HarvesterModel, TraceError};
pub use operation::{Objective, Scenario, Schedule, SolveError, SolveReport};
pub use spatial::{LinkPower, Point, PointSet, RadioConfig, Region, Topology};
