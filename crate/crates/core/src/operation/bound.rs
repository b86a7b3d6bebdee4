use super::{Scenario, SolveError};

/// Upper bound on the max-min average SNR obtained by pooling every SCBS's
/// horizon energy and letting all SCBSs beamform coherently to each user.
///
/// With coherent combining the SNR of a user is
/// `(Σ_m √(p_m g_m))² / σ²`, maximized for a fixed total power `P` by
/// `p_m ∝ g_m`, which yields `P Σ_m g_m / σ²`. Reaching an average SNR `γ`
/// for user `k` therefore needs `T γ σ² τ / G_k` joules with
/// `G_k = Σ_m g(k, m)`, regardless of how the power is spread over slots.
/// Summing over users and equating with the pooled energy gives the bound
/// in closed form. Battery clipping is ignored, which only loosens it.
///
/// The result is rounded outward by [`BOUND_ROUNDING`] so that it still
/// dominates achievable values evaluated with a different summation order.
pub fn distributed_bf_bound(scenario: &Scenario) -> Result<f64, SolveError> {
    if !scenario.grid_indices().is_empty() {
        return Err(SolveError::Unsupported("the beamforming bound needs an off-grid scenario".into()));
    }
    let pooled: f64 = (0..scenario.num_scbs()).map(|m| scenario.horizon_energy_j(m)).sum();
    let inverse_gain_sum: f64 = (0..scenario.num_users())
        .map(|k| 1.0 / (0..scenario.num_scbs()).map(|m| scenario.gain(k, m)).sum::<f64>())
        .sum();
    let radio = scenario.radio();
    let bound = pooled / (scenario.horizon() as f64 * radio.noise_w * scenario.slot_s() * inverse_gain_sum);
    Ok(bound * (1.0 + BOUND_ROUNDING))
}

/// Relative outward rounding applied to the beamforming bound.
pub const BOUND_ROUNDING: f64 = 1e-12;
