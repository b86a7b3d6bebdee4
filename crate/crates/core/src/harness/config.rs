use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::deployment::{Capacity, DeploymentConfig, EconomicParams, HarvestSpec, SweepParam};
use crate::energy::{load_trace, ColumnSpec};
use crate::spatial::{RadioConfig, Region, Topology};

use super::HarnessError;

/// Linear SNR target that puts the 10 % outage point of the default
/// off-grid deployment at λ_BS = 1.7e-4 m⁻² with an unbounded battery.
pub const CALIBRATED_GAMMA_TH: f64 = 4.46e3;

/// Arrival probability of the default intermittent harvester.
pub const DEFAULT_ARRIVAL_PROB: f64 = 0.985;

/// On-disk experiment description for `ehscn deploy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub region: RegionSection,
    pub network: NetworkSection,
    pub radio: RadioConfig,
    pub harvest: HarvestSection,
    pub battery: BatterySection,
    pub simulation: SimulationSection,
    pub economics: EconomicParams,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionSection {
    pub side_m: f64,
    pub topology: Topology,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub lambda_bs: f64,
    pub lambda_u: f64,
    pub eta: f64,
    pub circuit_power_w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarvestKind {
    Constant,
    Bernoulli,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestSection {
    pub model: HarvestKind,
    pub p_eh_w: f64,
    pub arrival_prob: f64,
    /// Trace file for `model = "trace"`, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    pub trace_has_header: bool,
    pub random_phase: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySection {
    pub capacity_j: Capacity,
    pub initial_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub slot_s: f64,
    pub horizon: usize,
    pub warmup: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Panel {
    /// Outage against density at η = 0, for C_B = 0 and C_B = ∞.
    A,
    /// Grid power against density at η = 1.
    B,
    /// Outage and grid power against η.
    C,
}

impl std::str::FromStr for Panel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            other => Err(format!("unknown panel {other:?}; expected a, b or c")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub panels: Vec<Panel>,
    /// Density grid for panels a and b.
    pub lambda_bs: Vec<f64>,
    /// η grid for panel c.
    pub eta: Vec<f64>,
    /// Optional extra one-parameter sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<SweepParam>,
    #[serde(with = "lenient_reals")]
    pub values: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 20,
            region: RegionSection::default(),
            network: NetworkSection::default(),
            radio: RadioConfig { gamma_th: CALIBRATED_GAMMA_TH, ..RadioConfig::default() },
            harvest: HarvestSection::default(),
            battery: BatterySection::default(),
            simulation: SimulationSection::default(),
            economics: EconomicParams::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl Default for RegionSection {
    fn default() -> Self {
        Self { side_m: 500.0, topology: Topology::Torus }
    }
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self { lambda_bs: 1.7e-4, lambda_u: 1e-3, eta: 0.0, circuit_power_w: 0.0 }
    }
}

impl Default for HarvestSection {
    fn default() -> Self {
        Self {
            model: HarvestKind::Bernoulli,
            p_eh_w: 0.02,
            arrival_prob: DEFAULT_ARRIVAL_PROB,
            trace: None,
            trace_has_header: false,
            random_phase: true,
        }
    }
}

impl Default for BatterySection {
    fn default() -> Self {
        Self { capacity_j: Capacity::Unbounded, initial_j: 0.0 }
    }
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self { slot_s: 1.0, horizon: 100, warmup: 0 }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            panels: vec![Panel::A, Panel::B, Panel::C],
            lambda_bs: vec![5e-5, 1e-4, 1.5e-4, 2e-4, 2.5e-4, 3e-4, 3.5e-4, 4e-4, 4.5e-4, 5e-4],
            eta: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            param: None,
            values: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a TOML file. A relative trace path is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg =
            Self::from_toml(&text).map_err(|message| HarnessError::Config { path: path.to_path_buf(), message })?;
        if let Some(trace) = &cfg.harvest.trace {
            if trace.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                cfg.harvest.trace = Some(base.join(trace));
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Builds and validates the simulator configuration, loading the
    /// harvest trace if one is named.
    pub fn to_deployment(&self) -> Result<DeploymentConfig, HarnessError> {
        let region = Region::new(self.region.side_m, self.region.topology).map_err(|e| {
            HarnessError::Sim(crate::SimError::InvalidConfig { key: "region.side_m", message: e.to_string() })
        })?;
        let h = &self.harvest;
        let harvest = match h.model {
            HarvestKind::Constant => HarvestSpec::Constant { p_eh_w: h.p_eh_w },
            HarvestKind::Bernoulli => HarvestSpec::Bernoulli { p_eh_w: h.p_eh_w, arrival_prob: h.arrival_prob },
            HarvestKind::Trace => {
                let path = h.trace.as_ref().ok_or_else(|| {
                    HarnessError::Sim(crate::SimError::InvalidConfig {
                        key: "harvest.trace",
                        message: "model \"trace\" needs a trace file".into(),
                    })
                })?;
                let columns = ColumnSpec { has_header: h.trace_has_header, ..ColumnSpec::default() };
                let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
                let loaded = load_trace(BufReader::new(file), &columns)
                    .map_err(|source| HarnessError::Trace { path: path.clone(), source })?;
                HarvestSpec::Trace { p_eh_w: h.p_eh_w, trace: Arc::new(loaded.trace), random_phase: h.random_phase }
            }
        };
        let cfg = DeploymentConfig {
            lambda_bs: self.network.lambda_bs,
            lambda_u: self.network.lambda_u,
            region,
            radio: self.radio,
            eta: self.network.eta,
            slot_s: self.simulation.slot_s,
            horizon: self.simulation.horizon,
            warmup: self.simulation.warmup,
            trials: self.trials,
            seed: self.seed,
            harvest,
            battery: self.battery.capacity_j,
            initial_battery_j: self.battery.initial_j,
            circuit_power_w: self.network.circuit_power_w,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reals that may be written as `inf` strings, so that JSON (which has no
/// infinity) round-trips battery sweeps.
pub(crate) mod lenient_reals {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Real {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let reals: Vec<Real> =
            values.iter().map(|&v| if v.is_finite() { Real::Num(v) } else { Real::Text(v.to_string()) }).collect();
        reals.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Real>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Real::Num(v) => Ok(v),
                Real::Text(t) => match t.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => Ok(f64::INFINITY),
                    _ => Err(D::Error::custom(format!("{t:?} is not a number"))),
                },
            })
            .collect()
    }
}
