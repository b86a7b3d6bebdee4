use std::io::Write;

use serde::Serialize;

use crate::numfmt::sig12;

use super::{Scenario, SolveError};

/// Relative slack allowed when checking that spending fits a budget.
pub const CAUSALITY_TOL: f64 = 1e-9;

/// Whether `available` joules cover `demand`, up to rounding.
pub fn covers(available: f64, demand: f64) -> bool {
    available >= demand - 1e-12 * demand.abs()
}

fn within_budget(spend: f64, available: f64) -> bool {
    spend <= available + CAUSALITY_TOL * available.abs().max(spend.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Assignment {
    pub scbs: usize,
    pub power_w: f64,
}

/// Serving SCBS and transmit power for every user in every slot,
/// indexed `[slot][user]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Schedule {
    pub slots: Vec<Vec<Assignment>>,
}

impl Schedule {
    pub fn new(slots: Vec<Vec<Assignment>>) -> Self {
        Self { slots }
    }

    pub fn get(&self, slot: usize, user: usize) -> Assignment {
        self.slots[slot][user]
    }

    /// Checks shape, power signs and energy causality (with slot-by-slot
    /// battery clipping) for every off-grid SCBS.
    pub fn validate(&self, scenario: &Scenario) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::InvalidSchedule(m));
        if self.slots.len() != scenario.horizon() {
            return bad(format!("{} slots for a horizon of {}", self.slots.len(), scenario.horizon()));
        }
        let mut ledger = EnergyLedger::new(scenario);
        for (t, slot) in self.slots.iter().enumerate() {
            if slot.len() != scenario.num_users() {
                return bad(format!("slot {t} has {} users, expected {}", slot.len(), scenario.num_users()));
            }
            let mut spend = vec![0.0; scenario.num_scbs()];
            for (k, a) in slot.iter().enumerate() {
                if a.scbs >= scenario.num_scbs() {
                    return bad(format!("slot {t} user {k}: no SCBS {}", a.scbs));
                }
                if !(a.power_w.is_finite() && a.power_w >= 0.0) {
                    return bad(format!("slot {t} user {k}: power {} is not a nonnegative wattage", a.power_w));
                }
                spend[a.scbs] += a.power_w * scenario.slot_s();
            }
            if let Err(m) = ledger.commit(&spend) {
                return bad(format!("slot {t}: SCBS {m} spends more energy than it has"));
            }
        }
        Ok(())
    }

    /// Writes `slot,user,scbs,power_watts` rows (all indices 0-based).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "slot,user,scbs,power_watts")?;
        for (t, slot) in self.slots.iter().enumerate() {
            for (k, a) in slot.iter().enumerate() {
                writeln!(out, "{t},{k},{},{}", a.scbs, sig12(a.power_w))?;
            }
        }
        Ok(())
    }
}

/// Battery bookkeeping for causal execution of a schedule. Grid-connected
/// SCBSs are treated as having unlimited supply.
#[derive(Debug, Clone)]
pub struct EnergyLedger<'a> {
    scenario: &'a Scenario,
    levels: Vec<f64>,
    slot: usize,
}

impl<'a> EnergyLedger<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let levels = scenario.scbs().iter().map(|b| b.initial_battery_j).collect();
        Self { scenario, levels, slot: 0 }
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    pub fn level(&self, m: usize) -> f64 {
        self.levels[m]
    }

    /// Energy SCBS `m` can spend in the current slot: stored plus this
    /// slot's harvest.
    pub fn available(&self, m: usize) -> f64 {
        if self.scenario.scbs()[m].grid_connected {
            f64::INFINITY
        } else {
            self.levels[m] + self.scenario.harvest_j(m)
        }
    }

    pub fn budgets(&self) -> Vec<f64> {
        (0..self.levels.len()).map(|m| self.available(m)).collect()
    }

    /// Spends `spend[m]` joules at each SCBS and advances one slot. Returns
    /// the first SCBS whose budget is exceeded.
    pub fn commit(&mut self, spend: &[f64]) -> Result<(), usize> {
        for (m, &e) in spend.iter().enumerate() {
            let b = &self.scenario.scbs()[m];
            if b.grid_connected {
                continue;
            }
            let avail = self.available(m);
            if !within_budget(e, avail) {
                return Err(m);
            }
            self.levels[m] = b.capacity.clip((avail - e).max(0.0)).0;
        }
        self.slot += 1;
        Ok(())
    }
}

/// Minimum over users of the time-averaged SNR, after validating the
/// schedule.
pub fn evaluate_min_avg_snr(schedule: &Schedule, scenario: &Scenario) -> Result<f64, SolveError> {
    schedule.validate(scenario)?;
    let noise = scenario.radio().noise_w;
    let horizon = scenario.horizon() as f64;
    let min = (0..scenario.num_users())
        .map(|k| {
            schedule.slots.iter().map(|slot| slot[k].power_w * scenario.gain(k, slot[k].scbs) / noise).sum::<f64>()
                / horizon
        })
        .fold(f64::INFINITY, f64::min);
    Ok(min)
}

/// Total energy transmitted by grid-connected SCBSs.
pub fn evaluate_grid_energy(schedule: &Schedule, scenario: &Scenario) -> Result<f64, SolveError> {
    schedule.validate(scenario)?;
    Ok(schedule
        .slots
        .iter()
        .flatten()
        .filter(|a| scenario.scbs()[a.scbs].grid_connected)
        .map(|a| a.power_w * scenario.slot_s())
        .sum())
}
