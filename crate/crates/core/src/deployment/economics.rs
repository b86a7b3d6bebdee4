use serde::{Deserialize, Serialize};

use super::{SimError, TradeoffCurve};

pub const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EconomicParams {
    pub capex_per_scbs: f64,
    pub price_per_kwh: f64,
    pub lifetime_years: f64,
}

impl Default for EconomicParams {
    /// $135 per SCBS, $0.1971/kWh, 10-year lifetime.
    fn default() -> Self {
        Self { capex_per_scbs: 135.0, price_per_kwh: 0.1971, lifetime_years: 10.0 }
    }
}

/// Lifetime cost per m²: equipment plus grid electricity.
pub fn economics(lambda_bs: f64, pg_per_scbs_w: f64, params: &EconomicParams) -> f64 {
    let hours = params.lifetime_years * HOURS_PER_YEAR;
    lambda_bs * params.capex_per_scbs + lambda_bs * pg_per_scbs_w * params.price_per_kwh * hours / 1000.0
}

/// Density on a P_G-vs-λ_BS curve with the lowest lifetime cost; ties go
/// to the smaller density.
pub fn optimal_density(curve: &TradeoffCurve, params: &EconomicParams) -> Result<f64, SimError> {
    let mut best: Option<(f64, f64)> = None;
    for p in &curve.points {
        let cost = economics(p.value, p.result.pg_per_scbs_w, params);
        match best {
            Some((_, c)) if cost >= c => {}
            _ => best = Some((p.value, cost)),
        }
    }
    best.map(|(v, _)| v).ok_or(SimError::EmptyCurve)
}
