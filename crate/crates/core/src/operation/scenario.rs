use serde::{Deserialize, Serialize};

use crate::deployment::Capacity;
use crate::spatial::{Point, RadioConfig};

use super::SolveError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScbs {
    pub position: Point,
    /// Constant harvesting rate, watts.
    pub p_eh_w: f64,
    pub capacity: Capacity,
    pub initial_battery_j: f64,
    pub grid_connected: bool,
}

impl ScenarioScbs {
    pub fn off_grid(position: Point, p_eh_w: f64) -> Self {
        Self { position, p_eh_w, capacity: Capacity::Unbounded, initial_battery_j: 0.0, grid_connected: false }
    }
}

/// A deployed instance: base stations, users and the horizon to plan over.
/// Distances are planar Euclidean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    scbs: Vec<ScenarioScbs>,
    users: Vec<Point>,
    radio: RadioConfig,
    horizon: usize,
    slot_s: f64,
}

impl Scenario {
    pub fn new(
        scbs: Vec<ScenarioScbs>,
        users: Vec<Point>,
        radio: RadioConfig,
        horizon: usize,
        slot_s: f64,
    ) -> Result<Self, SolveError> {
        let s = Self { scbs, users, radio, horizon, slot_s };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::InvalidScenario(m));
        if self.scbs.is_empty() {
            return bad("at least one SCBS is required".into());
        }
        if self.users.is_empty() {
            return bad("at least one user is required".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least one slot".into());
        }
        if !(self.slot_s.is_finite() && self.slot_s > 0.0) {
            return bad(format!("slot length {} must be positive", self.slot_s));
        }
        self.radio.validate().map_err(|e| SolveError::InvalidScenario(e.to_string()))?;
        for (m, b) in self.scbs.iter().enumerate() {
            if !(b.p_eh_w.is_finite() && b.p_eh_w >= 0.0) {
                return bad(format!("scbs {m}: harvesting rate must be nonnegative"));
            }
            if !b.capacity.is_valid() {
                return bad(format!("scbs {m}: capacity must be nonnegative"));
            }
            if !(b.initial_battery_j >= 0.0 && b.initial_battery_j <= b.capacity.joules()) {
                return bad(format!("scbs {m}: initial battery must lie in [0, capacity]"));
            }
        }
        let finite = |p: &Point| p.x.is_finite() && p.y.is_finite();
        if !self.scbs.iter().all(|b| finite(&b.position)) || !self.users.iter().all(finite) {
            return bad("positions must be finite".into());
        }
        Ok(())
    }

    pub fn scbs(&self) -> &[ScenarioScbs] {
        &self.scbs
    }

    pub fn users(&self) -> &[Point] {
        &self.users
    }

    pub fn radio(&self) -> &RadioConfig {
        &self.radio
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn slot_s(&self) -> f64 {
        self.slot_s
    }

    pub fn num_scbs(&self) -> usize {
        self.scbs.len()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn distance(&self, user: usize, scbs: usize) -> f64 {
        self.users[user].euclidean(&self.scbs[scbs].position)
    }

    pub fn gain(&self, user: usize, scbs: usize) -> f64 {
        self.radio.gain(self.distance(user, scbs))
    }

    /// Energy harvested by `scbs` in one slot.
    pub fn harvest_j(&self, scbs: usize) -> f64 {
        self.scbs[scbs].p_eh_w * self.slot_s
    }

    /// Initial charge plus all energy harvested over the horizon.
    pub fn horizon_energy_j(&self, scbs: usize) -> f64 {
        self.scbs[scbs].initial_battery_j + self.horizon as f64 * self.harvest_j(scbs)
    }

    pub fn grid_indices(&self) -> Vec<usize> {
        (0..self.scbs.len()).filter(|&m| self.scbs[m].grid_connected).collect()
    }

    /// Nearest SCBS to `user`, ties to the lowest index.
    pub fn nearest(&self, user: usize) -> usize {
        let mut best = (0, f64::INFINITY);
        for m in 0..self.scbs.len() {
            let d = self.distance(user, m);
            if d < best.1 {
                best = (m, d);
            }
        }
        best.0
    }

    /// Copy with every position multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |p: &Point| Point::new(p.x * factor, p.y * factor);
        let mut s = self.clone();
        s.scbs.iter_mut().for_each(|b| b.position = scale(&b.position));
        s.users.iter_mut().for_each(|u| *u = scale(u));
        s
    }

    /// Copy with SCBSs and users reordered by the given permutations
    /// (`new[i] = old[perm[i]]`).
    pub fn permuted(&self, scbs_perm: &[usize], user_perm: &[usize]) -> Self {
        let mut s = self.clone();
        s.scbs = scbs_perm.iter().map(|&i| self.scbs[i].clone()).collect();
        s.users = user_perm.iter().map(|&i| self.users[i]).collect();
        s
    }
}
