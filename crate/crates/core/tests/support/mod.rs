//! Oracles and instance generators shared by the integration tests.
#![allow(dead_code)]

use ehscn_core::deployment::Capacity;
use ehscn_core::operation::{Scenario, ScenarioScbs};
use ehscn_core::spatial::{Point, RadioConfig};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest number of demands whose sum fits the budget, by trying every
/// subset.
pub fn max_subset_count(budget: f64, demands: &[f64]) -> usize {
    assert!(demands.len() <= 20);
    (0u32..1 << demands.len())
        .filter(|mask| {
            let total: f64 = (0..demands.len()).filter(|i| mask >> i & 1 == 1).map(|i| demands[i]).sum();
            total <= budget
        })
        .map(|mask| mask.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

/// Off-grid instance with users and SCBSs uniform in a `side`-metre square
/// and energies of the same order as a user's per-slot demand at 10 dB.
pub fn random_offgrid(rng: &mut impl Rng, m: usize, k: usize, t: usize) -> Scenario {
    let side = 80.0;
    let pt = |r: &mut dyn rand::RngCore| Point::new(r.random_range(0.0..side), r.random_range(0.0..side));
    let scbs = (0..m)
        .map(|_| {
            let position = pt(rng);
            let capacity =
                if rng.random_bool(0.5) { Capacity::Unbounded } else { Capacity::Finite(rng.random_range(0.0..0.05)) };
            ScenarioScbs {
                position,
                p_eh_w: rng.random_range(0.0..0.02),
                capacity,
                initial_battery_j: if rng.random_bool(0.3) { rng.random_range(0.0..0.02) } else { 0.0 },
                grid_connected: false,
            }
        })
        .map(|mut b| {
            if let Capacity::Finite(c) = b.capacity {
                b.initial_battery_j = b.initial_battery_j.min(c);
            }
            b
        })
        .collect();
    let users = (0..k).map(|_| pt(rng)).collect();
    Scenario::new(scbs, users, RadioConfig::default(), t, 1.0).expect("valid random scenario")
}

/// Single-user instance with one grid SCBS (index 0) and `m - 1` EH-SCBSs.
/// Half of the instances use whole-joule demands and harvests so that
/// exact ties occur.
pub fn random_grid(rng: &mut impl Rng, m: usize, t: usize, unbounded: bool) -> Scenario {
    // γ σ² d⁴ = d⁴ / 10⁴ joules per slot at τ = 1 s, so d = 10 m costs 1 J.
    let radio = RadioConfig { gamma_th: 1e9, ..RadioConfig::default() };
    let lattice = rng.random_bool(0.5);
    let mut scbs = vec![ScenarioScbs { grid_connected: true, ..ScenarioScbs::off_grid(Point::new(0.0, -10.0), 0.0) }];
    for _ in 1..m {
        let (d, rate, init) = if lattice {
            let demand: u32 = rng.random_range(1..=5);
            let d = 10.0 * f64::from(demand).powf(0.25);
            (d, f64::from(rng.random_range(0..=demand)), f64::from(rng.random_range(0..=2u32)))
        } else {
            let d = rng.random_range(5.0..20.0);
            let demand = (d / 10.0_f64).powi(4);
            (d, demand * rng.random_range(0.0..1.2), demand * rng.random_range(0.0..1.5))
        };
        let capacity = if unbounded {
            Capacity::Unbounded
        } else {
            Capacity::Finite(rng.random_range(init.max(0.5)..init.max(0.5) * 3.0))
        };
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        scbs.push(ScenarioScbs {
            position: Point::new(d * angle.cos(), d * angle.sin()),
            p_eh_w: rate,
            capacity,
            initial_battery_j: init,
            grid_connected: false,
        });
    }
    Scenario::new(scbs, vec![Point::new(0.0, 0.0)], radio, t, 1.0).expect("valid random scenario")
}

/// Exact optimum of the time-averaged max-min SNR over every schedule
/// (one SCBS per user per slot, any nonnegative powers, energy causality
/// with per-slot battery clipping).
///
/// Branch and bound over user-slot associations. Each node solves a linear
/// program in which the still-open user-slots may draw energy from any
/// SCBS; that relaxation bounds every completion, and when its solution
/// uses at most one SCBS per open user-slot it is attained.
pub fn maxmin_oracle(s: &Scenario) -> f64 {
    let lp = Lp::new(s);
    if lp.energy_scale == 0.0 {
        return 0.0;
    }
    let (k, t) = (s.num_users(), s.horizon());
    let nearest: Vec<Option<usize>> = (0..t * k).map(|i| Some(s.nearest(i % k))).collect();
    let mut best = lp.solve(&nearest).0;
    let mut stack = vec![vec![None; t * k]];
    while let Some(fixed) = stack.pop() {
        let (value, shares) = lp.solve(&fixed);
        if value <= best * (1.0 + 1e-9) {
            continue;
        }
        // Open user-slot whose energy is most evenly split.
        let split = (0..t * k)
            .filter(|&i| fixed[i].is_none())
            .map(|i| {
                let mut v: Vec<(f64, usize)> = shares[i].iter().copied().zip(0..).collect();
                v.sort_by(|a, b| b.0.total_cmp(&a.0));
                (v.get(1).map_or(0.0, |x| x.0), i, v)
            })
            .filter(|(second, _, _)| *second > 1e-9)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match split {
            None => best = best.max(value),
            Some((_, i, order)) => {
                for &(_, m) in order.iter().rev() {
                    let mut child = fixed.clone();
                    child[i] = Some(m);
                    stack.push(child);
                }
            }
        }
    }
    best
}

struct Lp<'a> {
    s: &'a Scenario,
    energy_scale: f64,
    gain_scale: f64,
}

impl<'a> Lp<'a> {
    fn new(s: &'a Scenario) -> Self {
        let energy_scale = (0..s.num_scbs())
            .map(|m| s.scbs()[m].initial_battery_j + s.horizon() as f64 * s.harvest_j(m))
            .fold(0.0, f64::max);
        let gain_scale = (0..s.num_users())
            .flat_map(|k| (0..s.num_scbs()).map(move |m| (k, m)))
            .map(|(k, m)| s.gain(k, m))
            .fold(0.0, f64::max);
        Self { s, energy_scale, gain_scale }
    }

    /// Relaxed optimum and, per user-slot, the energy drawn from each SCBS.
    fn solve(&self, fixed: &[Option<usize>]) -> (f64, Vec<Vec<f64>>) {
        let s = self.s;
        let (mm, k, t) = (s.num_scbs(), s.num_users(), s.horizon());
        let e = self.energy_scale;
        let mut p = Problem::new(OptimizationDirection::Maximize);
        let z = p.add_var(1.0, (0.0, f64::INFINITY));
        let cap = s.radio().p_max_w.map_or(f64::INFINITY, |w| w * s.slot_s() / e);
        let vars: Vec<Vec<Option<microlp::Variable>>> = (0..t * k)
            .map(|i| {
                (0..mm)
                    .map(|m| match fixed[i] {
                        Some(f) if f != m => None,
                        _ => Some(p.add_var(0.0, (0.0, cap))),
                    })
                    .collect()
            })
            .collect();
        for m in 0..mm {
            let b = &s.scbs()[m];
            let level_cap = match b.capacity {
                Capacity::Finite(c) => c / e,
                Capacity::Unbounded => f64::INFINITY,
            };
            let h = s.harvest_j(m) / e;
            let mut prev: Option<microlp::Variable> = None;
            let init = b.initial_battery_j / e;
            for slot in 0..t {
                let level = p.add_var(0.0, (0.0, level_cap));
                let mut terms: Vec<(microlp::Variable, f64)> =
                    (0..k).filter_map(|u| vars[slot * k + u][m].map(|v| (v, 1.0))).collect();
                terms.push((level, 1.0));
                let rhs = match prev {
                    Some(pv) => {
                        terms.push((pv, -1.0));
                        h
                    }
                    None => h + init,
                };
                p.add_constraint(terms, ComparisonOp::Le, rhs);
                prev = Some(level);
            }
        }
        for u in 0..k {
            let mut terms: Vec<(microlp::Variable, f64)> = vec![(z, -1.0)];
            for slot in 0..t {
                for m in 0..mm {
                    if let Some(v) = vars[slot * k + u][m] {
                        terms.push((v, s.gain(u, m) / self.gain_scale));
                    }
                }
            }
            p.add_constraint(terms, ComparisonOp::Ge, 0.0);
        }
        let sol = p.solve().expect("relaxation is feasible and bounded").into_solution().expect("solved");
        let shares = vars.iter().map(|row| row.iter().map(|v| v.map_or(0.0, |v| sol.var_value(v))).collect()).collect();
        let radio = s.radio();
        let unit = e * self.gain_scale / (radio.noise_w * s.slot_s() * t as f64);
        (sol.var_value(z) * unit, shares)
    }
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at the 1 % level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_61 / (n as f64).sqrt()
}

/// Coefficient of determination of the least-squares line through the
/// points.
pub fn linear_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    1.0 - ss_res / syy
}

/// Whether some association gives every user SNR `gamma` in every slot
/// without breaking energy causality. Exhaustive over all `M^(K T)`
/// association tensors.
pub fn per_slot_feasible(s: &Scenario, gamma: f64) -> bool {
    let (m, k, t) = (s.num_scbs(), s.num_users(), s.horizon());
    let radio = s.radio();
    let demand = |u: usize, b: usize| radio.power_for_snr(gamma, s.distance(u, b)) * s.slot_s();
    let cells = k * t;
    let total = (m as u64).pow(cells as u32);
    (0..total).any(|code| {
        let mut code = code;
        let mut level: Vec<f64> = s.scbs().iter().map(|b| b.initial_battery_j).collect();
        for _ in 0..t {
            let mut spend = vec![0.0; m];
            for u in 0..k {
                let b = (code % m as u64) as usize;
                code /= m as u64;
                spend[b] += demand(u, b);
            }
            for b in 0..m {
                let avail = level[b] + s.harvest_j(b);
                if spend[b] > avail * (1.0 + 1e-9) {
                    return false;
                }
                level[b] = (avail - spend[b]).max(0.0).min(s.scbs()[b].capacity.joules());
            }
        }
        true
    })
}
