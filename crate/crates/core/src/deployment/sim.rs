use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::rng::{stream, GRID_MARKS, HARVEST, SCBS_POINTS, TRACE_PHASE, USER_POINTS};
use crate::spatial::{associate_nearest, generate_ppp, required_power, LinkPower, PointSet};

use super::{step_slot, BatteryState, DeploymentConfig, ScbsNode, SimError};

const Z_95: f64 = 1.959_963_984_540_054;
const CONSERVATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TrialStats {
    pub users: usize,
    pub scbs: usize,
    pub unserved_user_slots: u64,
    pub user_slots: u64,
    pub grid_j: f64,
    pub max_conservation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub p_out: f64,
    /// Half-width of the 95% confidence interval.
    pub p_out_ci: f64,
    /// Average grid power per deployed SCBS, watts.
    pub pg_per_scbs_w: f64,
    /// Average grid power per m² of region, watts.
    pub pg_per_m2_w: f64,
    /// Half-width of the 95% confidence interval of `pg_per_scbs_w`.
    pub pg_ci: f64,
    pub trials: usize,
    pub user_slots: u64,
    pub scbs_deployed: u64,
    pub max_conservation_error: f64,
}

/// Runs one trial: draw the deployment, associate, then step every node
/// through `warmup + horizon` slots.
pub fn run_trial(cfg: &DeploymentConfig, trial: usize) -> Result<TrialStats, SimError> {
    let t = trial as u64;
    let scbs = generate_ppp(cfg.lambda_bs, &cfg.region, &mut stream(cfg.seed, &[t, SCBS_POINTS]));
    let users = generate_ppp(cfg.lambda_u, &cfg.region, &mut stream(cfg.seed, &[t, USER_POINTS]));
    let mut marks = stream(cfg.seed, &[t, GRID_MARKS]);
    let grid: Vec<bool> = (0..scbs.len()).map(|_| marks.random::<f64>() < cfg.eta).collect();
    run_layout(cfg, trial, &scbs, &users, &grid)
}

/// Steps a given layout; `grid[m]` marks SCBS `m` as on-grid. Harvest
/// randomness is drawn from the streams of `trial`.
pub fn run_layout(
    cfg: &DeploymentConfig,
    trial: usize,
    scbs: &PointSet,
    users: &PointSet,
    grid: &[bool],
) -> Result<TrialStats, SimError> {
    assert_eq!(grid.len(), scbs.len(), "one grid flag per SCBS");
    let t = trial as u64;
    let mut phases = stream(cfg.seed, &[t, TRACE_PHASE]);
    let mut nodes: Vec<ScbsNode> = scbs
        .iter()
        .zip(grid)
        .map(|(p, &on_grid)| ScbsNode {
            position: *p,
            harvester: cfg.harvest.model_for_node(cfg.slot_s, &mut phases),
            battery: BatteryState { capacity: cfg.battery, level_j: cfg.initial_battery_j },
            grid_connected: on_grid,
            circuit_power_w: cfg.circuit_power_w,
        })
        .collect();

    let mut demands: Vec<Vec<LinkPower>> = vec![Vec::new(); nodes.len()];
    if !scbs.is_empty() {
        let assoc = associate_nearest(users, scbs, &cfg.region).expect("non-empty SCBS set");
        for (u, &m) in users.iter().zip(&assoc) {
            demands[m].push(required_power(cfg.region.distance(u, &scbs.points()[m]), &cfg.radio));
        }
    }

    let mut harvest_rngs: Vec<_> = (0..nodes.len()).map(|m| stream(cfg.seed, &[t, HARVEST, m as u64])).collect();
    let mut stats = TrialStats {
        users: users.len(),
        scbs: nodes.len(),
        user_slots: (users.len() * cfg.horizon) as u64,
        ..Default::default()
    };
    if nodes.is_empty() {
        stats.unserved_user_slots = stats.user_slots;
    }

    for slot in 0..cfg.warmup + cfg.horizon {
        let measured = slot >= cfg.warmup;
        for ((node, cell), rng) in nodes.iter_mut().zip(&demands).zip(&mut harvest_rngs) {
            let harvested = node.harvester.sample_energy(slot as u64, cfg.slot_s, rng);
            let before = node.battery.level_j;
            let out = step_slot(node, cell, harvested, cfg.slot_s);
            let err = out.conservation_error(before, harvested);
            if err > CONSERVATION_TOL {
                return Err(SimError::Conservation(err));
            }
            stats.max_conservation_error = stats.max_conservation_error.max(err);
            node.battery = out.battery;
            if measured {
                stats.unserved_user_slots += out.unserved as u64;
                stats.grid_j += out.grid_drawn_j;
            }
        }
    }
    Ok(stats)
}

/// Ratio-of-sums estimate with a delta-method 95% half-width.
fn ratio_ci(nums: &[f64], dens: &[f64]) -> (f64, f64) {
    let total_n: f64 = nums.iter().sum();
    let total_d: f64 = dens.iter().sum();
    if total_d == 0.0 {
        return (0.0, 0.0);
    }
    let ratio = total_n / total_d;
    let n = nums.len();
    if n < 2 {
        return (ratio, 0.0);
    }
    let mean_d = total_d / n as f64;
    let s2 = nums.iter().zip(dens).map(|(a, b)| (a - ratio * b).powi(2)).sum::<f64>() / (n - 1) as f64;
    (ratio, Z_95 * (s2 / n as f64).sqrt() / mean_d)
}

pub fn aggregate(cfg: &DeploymentConfig, trials: &[TrialStats]) -> Result<SimResult, SimError> {
    let user_slots: u64 = trials.iter().map(|t| t.user_slots).sum();
    if user_slots == 0 {
        return Err(SimError::UndefinedOutage);
    }
    let unserved: Vec<f64> = trials.iter().map(|t| t.unserved_user_slots as f64).collect();
    let slots: Vec<f64> = trials.iter().map(|t| t.user_slots as f64).collect();
    let (p_out, p_out_ci) = ratio_ci(&unserved, &slots);

    let duration = cfg.horizon as f64 * cfg.slot_s;
    let grid_w: Vec<f64> = trials.iter().map(|t| t.grid_j / duration).collect();
    let scbs: Vec<f64> = trials.iter().map(|t| t.scbs as f64).collect();
    let (pg_per_scbs_w, pg_ci) = ratio_ci(&grid_w, &scbs);
    let pg_per_m2_w = grid_w.iter().sum::<f64>() / (cfg.region.area() * trials.len() as f64);

    Ok(SimResult {
        p_out,
        p_out_ci,
        pg_per_scbs_w,
        pg_per_m2_w,
        pg_ci,
        trials: trials.len(),
        user_slots,
        scbs_deployed: trials.iter().map(|t| t.scbs as u64).sum(),
        max_conservation_error: trials.iter().map(|t| t.max_conservation_error).fold(0.0, f64::max),
    })
}

/// Monte Carlo estimate of outage and grid power for one configuration.
///
/// Trials run in parallel; aggregation follows trial order, so the result
/// does not depend on the thread count.
pub fn simulate(cfg: &DeploymentConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let trials: Vec<TrialStats> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<_, _>>()?;
    aggregate(cfg, &trials)
}
