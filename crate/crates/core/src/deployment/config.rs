use std::sync::Arc;

use rand::Rng;

use crate::energy::{EnergyTrace, HarvesterModel};
use crate::spatial::{RadioConfig, Region, Topology};

use super::{Capacity, SimError};

/// How each base station's energy arrivals are generated. Every variant
/// is parameterized by its mean harvested power `p_eh_w`.
#[derive(Debug, Clone, PartialEq)]
pub enum HarvestSpec {
    Constant {
        p_eh_w: f64,
    },
    /// Quanta of `p_eh_w * slot / arrival_prob` joules arrive independently
    /// per slot with probability `arrival_prob`.
    Bernoulli {
        p_eh_w: f64,
        arrival_prob: f64,
    },
    /// A trace rescaled to mean `p_eh_w`; each node gets a uniform random
    /// phase when `random_phase` is set.
    Trace {
        p_eh_w: f64,
        trace: Arc<EnergyTrace>,
        random_phase: bool,
    },
}

impl HarvestSpec {
    pub fn p_eh_w(&self) -> f64 {
        match self {
            Self::Constant { p_eh_w } | Self::Bernoulli { p_eh_w, .. } | Self::Trace { p_eh_w, .. } => *p_eh_w,
        }
    }

    pub fn with_p_eh(&self, rate: f64) -> Self {
        let mut s = self.clone();
        match &mut s {
            Self::Constant { p_eh_w } | Self::Bernoulli { p_eh_w, .. } | Self::Trace { p_eh_w, .. } => *p_eh_w = rate,
        }
        s
    }

    pub fn model_for_node<R: Rng + ?Sized>(&self, slot_s: f64, rng: &mut R) -> HarvesterModel {
        match self {
            Self::Constant { p_eh_w } => HarvesterModel::Constant { rate_w: *p_eh_w },
            Self::Bernoulli { p_eh_w, arrival_prob } => HarvesterModel::Bernoulli {
                arrival_prob: *arrival_prob,
                quantum_j: if *arrival_prob > 0.0 { p_eh_w * slot_s / arrival_prob } else { 0.0 },
            },
            Self::Trace { p_eh_w, trace, random_phase } => {
                let phase = if *random_phase { rng.random_range(0..trace.len() as u64) } else { 0 };
                HarvesterModel::TraceScaled {
                    trace: Arc::clone(trace),
                    scale: p_eh_w / trace.mean(),
                    phase_slots: phase,
                }
            }
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        let rate = self.p_eh_w();
        if !(rate.is_finite() && rate >= 0.0) {
            return Err(SimError::InvalidConfig {
                key: "harvest.p_eh_w",
                message: format!("{rate} must be a nonnegative power"),
            });
        }
        match self {
            Self::Bernoulli { arrival_prob, .. } if !(0.0..=1.0).contains(arrival_prob) => {
                Err(SimError::InvalidConfig {
                    key: "harvest.arrival_prob",
                    message: format!("{arrival_prob} is not a probability"),
                })
            }
            Self::Bernoulli { arrival_prob, p_eh_w } if *arrival_prob == 0.0 && *p_eh_w > 0.0 => {
                Err(SimError::InvalidConfig {
                    key: "harvest.arrival_prob",
                    message: "zero arrival probability cannot deliver a positive mean rate".into(),
                })
            }
            Self::Trace { trace, .. } if trace.mean() <= 0.0 => {
                Err(SimError::InvalidConfig { key: "harvest.trace", message: "trace has zero mean".into() })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentConfig {
    /// SCBS density, per m².
    pub lambda_bs: f64,
    /// User density, per m².
    pub lambda_u: f64,
    pub region: Region,
    pub radio: RadioConfig,
    /// Probability that a deployed SCBS has a grid connection.
    pub eta: f64,
    pub slot_s: f64,
    /// Measured slots per trial.
    pub horizon: usize,
    /// Slots simulated before measurement starts.
    pub warmup: usize,
    pub trials: usize,
    pub seed: u64,
    pub harvest: HarvestSpec,
    pub battery: Capacity,
    pub initial_battery_j: f64,
    pub circuit_power_w: f64,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            lambda_bs: 1.7e-4,
            lambda_u: 1e-3,
            region: Region::new(500.0, Topology::Torus).expect("valid default region"),
            radio: RadioConfig::default(),
            eta: 0.0,
            slot_s: 1.0,
            horizon: 100,
            warmup: 0,
            trials: 20,
            seed: 1,
            harvest: HarvestSpec::Constant { p_eh_w: 0.02 },
            battery: Capacity::Unbounded,
            initial_battery_j: 0.0,
            circuit_power_w: 0.0,
        }
    }
}

impl DeploymentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |key, message: String| Err(SimError::InvalidConfig { key, message });
        let density = |v: f64| v.is_finite() && v >= 0.0;
        if !density(self.lambda_bs) {
            return bad("network.lambda_bs", format!("{} must be a nonnegative density", self.lambda_bs));
        }
        if !density(self.lambda_u) {
            return bad("network.lambda_u", format!("{} must be a nonnegative density", self.lambda_u));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return bad("network.eta", format!("{} is outside [0, 1]", self.eta));
        }
        if !(self.slot_s.is_finite() && self.slot_s > 0.0) {
            return bad("simulation.slot_s", format!("{} must be positive", self.slot_s));
        }
        if self.horizon == 0 {
            return bad("simulation.horizon", "must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials", "must be at least 1".into());
        }
        if !self.battery.is_valid() {
            return bad("harvest.battery_j", "capacity must be nonnegative".into());
        }
        if !(self.initial_battery_j >= 0.0 && self.initial_battery_j <= self.battery.joules()) {
            return bad("harvest.initial_battery_j", "must lie in [0, capacity]".into());
        }
        if !(self.circuit_power_w.is_finite() && self.circuit_power_w >= 0.0) {
            return bad("network.circuit_power_w", "must be nonnegative".into());
        }
        self.radio.validate().or_else(|e| bad("radio", e.to_string()))?;
        self.harvest.validate()
    }
}
