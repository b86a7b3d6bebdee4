use std::sync::Arc;

use rand::Rng;

use super::{EnergyTrace, TraceError};

/// Per-slot energy arrival process of one base station.
#[derive(Debug, Clone, PartialEq)]
pub enum HarvesterModel {
    /// Deterministic average rate in watts.
    Constant { rate_w: f64 },
    /// Trace sample (watts) scaled by `scale`, read cyclically starting at
    /// `phase_slots`.
    TraceScaled { trace: Arc<EnergyTrace>, scale: f64, phase_slots: u64 },
    /// A quantum of `quantum_j` joules arrives with probability
    /// `arrival_prob` in each slot.
    Bernoulli { arrival_prob: f64, quantum_j: f64 },
}

impl HarvesterModel {
    pub fn constant(rate_w: f64) -> Result<Self, TraceError> {
        let m = Self::Constant { rate_w };
        m.validate().map(|_| m)
    }

    pub fn bernoulli(arrival_prob: f64, quantum_j: f64) -> Result<Self, TraceError> {
        let m = Self::Bernoulli { arrival_prob, quantum_j };
        m.validate().map(|_| m)
    }

    pub fn trace_scaled(trace: Arc<EnergyTrace>, scale: f64, phase_slots: u64) -> Result<Self, TraceError> {
        let m = Self::TraceScaled { trace, scale, phase_slots };
        m.validate().map(|_| m)
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let ok = match self {
            Self::Constant { rate_w } => rate_w.is_finite() && *rate_w >= 0.0,
            Self::TraceScaled { scale, .. } => scale.is_finite() && *scale > 0.0,
            Self::Bernoulli { arrival_prob, quantum_j } => {
                (0.0..=1.0).contains(arrival_prob) && quantum_j.is_finite() && *quantum_j >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(TraceError::Invalid(format!("harvester parameters out of range: {self:?}")))
        }
    }

    /// Energy (joules) harvested during slot `slot_index`.
    ///
    /// Only the Bernoulli variant consumes randomness (one uniform per call).
    pub fn sample_energy<R: Rng + ?Sized>(&self, slot_index: u64, slot_s: f64, rng: &mut R) -> f64 {
        match self {
            Self::Constant { rate_w } => rate_w * slot_s,
            Self::TraceScaled { trace, scale, phase_slots } => {
                let idx = (slot_index.wrapping_add(*phase_slots) % trace.len() as u64) as usize;
                scale * trace.samples()[idx] * slot_s
            }
            Self::Bernoulli { arrival_prob, quantum_j } => {
                if rng.random::<f64>() < *arrival_prob {
                    *quantum_j
                } else {
                    0.0
                }
            }
        }
    }

    /// Expected energy per slot. For traces this is the expectation over a
    /// uniformly random position in the cycle.
    pub fn expected_energy(&self, slot_s: f64) -> f64 {
        match self {
            Self::Constant { rate_w } => rate_w * slot_s,
            Self::TraceScaled { trace, scale, .. } => scale * trace.mean() * slot_s,
            Self::Bernoulli { arrival_prob, quantum_j } => arrival_prob * quantum_j,
        }
    }

    pub fn energy_variance(&self, slot_s: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::TraceScaled { trace, scale, .. } => (scale * slot_s).powi(2) * trace.variance(),
            Self::Bernoulli { arrival_prob, quantum_j } => arrival_prob * (1.0 - arrival_prob) * quantum_j * quantum_j,
        }
    }

    /// Mean harvested power in watts.
    pub fn mean_rate_w(&self, slot_s: f64) -> f64 {
        self.expected_energy(slot_s) / slot_s
    }
}
