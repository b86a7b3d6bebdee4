use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::numfmt::sig12;

use super::{simulate, Capacity, DeploymentConfig, SimError, SimResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    LambdaBs,
    PEh,
    /// Battery capacity in joules; `inf` selects an unbounded battery.
    Battery,
    Eta,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LambdaBs => "lambda_bs",
            Self::PEh => "p_eh",
            Self::Battery => "battery",
            Self::Eta => "eta",
        }
    }

    pub fn apply(&self, cfg: &DeploymentConfig, value: f64) -> DeploymentConfig {
        let mut c = cfg.clone();
        match self {
            Self::LambdaBs => c.lambda_bs = value,
            Self::PEh => c.harvest = c.harvest.with_p_eh(value),
            Self::Battery => {
                c.battery = Capacity::from_joules(value);
                c.initial_battery_j = c.initial_battery_j.min(value);
            }
            Self::Eta => c.eta = value,
        }
        c
    }
}

impl std::str::FromStr for SweepParam {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lambda_bs" => Ok(Self::LambdaBs),
            "p_eh" => Ok(Self::PEh),
            "battery" => Ok(Self::Battery),
            "eta" => Ok(Self::Eta),
            other => Err(format!("unknown sweep parameter {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub value: f64,
    pub result: SimResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffCurve {
    pub param: SweepParam,
    pub points: Vec<CurvePoint>,
}

pub const CURVE_CSV_HEADER: &str = "param,value,p_out,p_out_ci,P_G_per_scbs,P_G_per_m2,P_G_ci,trials,user_slots";

impl TradeoffCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CURVE_CSV_HEADER}")?;
        for p in &self.points {
            let r = &p.result;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.param.name(),
                sig12(p.value),
                sig12(r.p_out),
                sig12(r.p_out_ci),
                sig12(r.pg_per_scbs_w),
                sig12(r.pg_per_m2_w),
                sig12(r.pg_ci),
                r.trials,
                r.user_slots
            )?;
        }
        Ok(())
    }
}

/// Simulates the template at each value of `param`. All points share the
/// template seed, so neighbouring points use common random numbers.
pub fn sweep(template: &DeploymentConfig, param: SweepParam, values: &[f64]) -> Result<TradeoffCurve, SimError> {
    if values.is_empty()
        || values.windows(2).any(|w| !matches!(w[0].partial_cmp(&w[1]), Some(Ordering::Less | Ordering::Equal)))
    {
        return Err(SimError::BadSweep);
    }
    let points = values
        .iter()
        .map(|&v| simulate(&param.apply(template, v)).map(|result| CurvePoint { value: v, result }))
        .collect::<Result<_, _>>()?;
    Ok(TradeoffCurve { param, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_values() {
        let cfg = DeploymentConfig::default();
        assert!(matches!(sweep(&cfg, SweepParam::Eta, &[]), Err(SimError::BadSweep)));
        assert!(matches!(sweep(&cfg, SweepParam::Eta, &[0.5, 0.1]), Err(SimError::BadSweep)));
    }

    #[test]
    fn csv_layout() {
        let cfg = DeploymentConfig { horizon: 3, trials: 2, ..Default::default() };
        let curve = sweep(&cfg, SweepParam::Eta, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CURVE_CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("eta,1,0,0,"));
    }

    #[test]
    fn battery_apply_handles_infinity() {
        let cfg = DeploymentConfig::default();
        assert_eq!(SweepParam::Battery.apply(&cfg, f64::INFINITY).battery, Capacity::Unbounded);
        assert_eq!(SweepParam::Battery.apply(&cfg, 2.0).battery, Capacity::Finite(2.0));
        assert_eq!("p_eh".parse::<SweepParam>().unwrap(), SweepParam::PEh);
    }
}
