use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::deployment::Capacity;
use crate::operation::{Scenario, ScenarioScbs};
use crate::spatial::{Point, RadioConfig};

use super::HarnessError;

/// On-disk instance for `ehscn operate` and `ehscn oracle`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub horizon: usize,
    #[serde(default = "unit_slot")]
    pub slot_s: f64,
    #[serde(default)]
    pub radio: RadioConfig,
    pub scbs: Vec<ScbsEntry>,
    pub users: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScbsEntry {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub p_eh_w: f64,
    #[serde(default)]
    pub capacity_j: Capacity,
    #[serde(default)]
    pub initial_battery_j: f64,
    #[serde(default)]
    pub grid: bool,
}

fn unit_slot() -> f64 {
    1.0
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|message| HarnessError::Config { path: path.to_path_buf(), message })
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            horizon: s.horizon(),
            slot_s: s.slot_s(),
            radio: *s.radio(),
            scbs: s
                .scbs()
                .iter()
                .map(|b| ScbsEntry {
                    x: b.position.x,
                    y: b.position.y,
                    p_eh_w: b.p_eh_w,
                    capacity_j: b.capacity,
                    initial_battery_j: b.initial_battery_j,
                    grid: b.grid_connected,
                })
                .collect(),
            users: s.users().to_vec(),
        }
    }

    pub fn to_scenario(&self) -> Result<Scenario, HarnessError> {
        let scbs = self
            .scbs
            .iter()
            .map(|e| ScenarioScbs {
                position: Point::new(e.x, e.y),
                p_eh_w: e.p_eh_w,
                capacity: e.capacity_j,
                initial_battery_j: e.initial_battery_j,
                grid_connected: e.grid,
            })
            .collect();
        Ok(Scenario::new(scbs, self.users.clone(), self.radio, self.horizon, self.slot_s)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }
}
