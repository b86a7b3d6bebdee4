use super::{
    baseline_distance, baseline_snr_greedy, distributed_bf_bound, evaluate_min_avg_snr, feasibility, Assignment,
    Objective, Scenario, Schedule, SolveError, SolveMeta, SolveReport,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
const MAX_ITERATIONS: usize = 200;

fn silent_schedule(scenario: &Scenario) -> Schedule {
    let row: Vec<Assignment> =
        (0..scenario.num_users()).map(|k| Assignment { scbs: scenario.nearest(k), power_w: 0.0 }).collect();
    Schedule::new(vec![row; scenario.horizon()])
}

/// Max-min average SNR by bisection on a common per-slot SNR target.
///
/// The target is bisected on `[0, γ_UB]` with `γ_UB` from
/// [`distributed_bf_bound`] until the bracket is within `tolerance` of the
/// best feasible target. If either baseline achieves a higher objective its
/// schedule is returned instead, so the result never falls below them.
pub fn maxmin_bisection(scenario: &Scenario, tolerance: f64) -> Result<SolveReport, SolveError> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(SolveError::InvalidTolerance(tolerance));
    }
    let upper = distributed_bf_bound(scenario)?;

    let mut lo = 0.0;
    let mut hi = upper;
    let mut witness = silent_schedule(scenario);
    let mut iterations = 0;
    if let Some(s) = feasibility(hi, scenario) {
        lo = hi;
        witness = s;
    }
    while iterations < MAX_ITERATIONS && hi - lo > tolerance * lo {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        match feasibility(mid, scenario) {
            Some(s) => {
                lo = mid;
                witness = s;
            }
            None => hi = mid,
        }
    }

    let mut value = evaluate_min_avg_snr(&witness, scenario)?;
    let mut schedule = witness;
    let mut fallback = None;
    for baseline in [baseline_distance(scenario)?, baseline_snr_greedy(scenario)?] {
        if baseline.objective.value() > value {
            value = baseline.objective.value();
            fallback = Some(baseline.solver);
            schedule = baseline.schedule;
        }
    }
    if value > upper * (1.0 + 1e-9) {
        return Err(SolveError::BoundViolation { value, bound: upper });
    }

    Ok(SolveReport {
        solver: "bisection",
        objective: Objective::MinAvgSnr(value),
        meta: SolveMeta {
            iterations,
            interval_width: Some(hi - lo),
            upper_bound: Some(upper),
            fallback,
            ..Default::default()
        },
        schedule,
    })
}
