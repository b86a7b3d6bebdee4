use super::{
    evaluate_min_avg_snr, Assignment, EnergyLedger, Objective, Scenario, Schedule, SolveError, SolveMeta, SolveReport,
};

/// Splits `budget_j` among `users` so that they all reach the same SNR,
/// respecting the per-link power cap. Returns per-user powers.
pub(crate) fn equalize_cell(scenario: &Scenario, scbs: usize, users: &[usize], budget_j: f64) -> Vec<f64> {
    if users.is_empty() {
        return Vec::new();
    }
    let radio = scenario.radio();
    let inv_gain: Vec<f64> = users.iter().map(|&k| 1.0 / scenario.gain(k, scbs)).collect();
    let sum_inv: f64 = inv_gain.iter().sum();
    let mut level = budget_j.max(0.0) / (scenario.slot_s() * radio.noise_w * sum_inv);
    if let Some(cap) = radio.p_max_w {
        let worst = inv_gain.iter().copied().fold(0.0, f64::max);
        level = level.min(cap / (radio.noise_w * worst));
    }
    inv_gain.iter().map(|ig| level * radio.noise_w * ig).collect()
}

/// Runs a fixed per-slot association, each SCBS spending its whole current
/// budget on SNR-equalized powers for its users.
fn run_association<F>(scenario: &Scenario, mut associate: F) -> Result<Schedule, SolveError>
where
    F: FnMut(&EnergyLedger<'_>) -> Vec<usize>,
{
    let mut ledger = EnergyLedger::new(scenario);
    let mut slots = Vec::with_capacity(scenario.horizon());
    for _ in 0..scenario.horizon() {
        let assoc = associate(&ledger);
        let mut row = vec![Assignment { scbs: 0, power_w: 0.0 }; scenario.num_users()];
        let mut spend = vec![0.0; scenario.num_scbs()];
        for m in 0..scenario.num_scbs() {
            let members: Vec<usize> = (0..assoc.len()).filter(|&k| assoc[k] == m).collect();
            let powers = equalize_cell(scenario, m, &members, ledger.available(m));
            for (&k, p) in members.iter().zip(powers) {
                row[k] = Assignment { scbs: m, power_w: p };
                spend[m] += p * scenario.slot_s();
            }
        }
        ledger.commit(&spend).map_err(|m| SolveError::InvalidSchedule(format!("baseline overspent SCBS {m}")))?;
        slots.push(row);
    }
    Ok(Schedule::new(slots))
}

fn report(solver: &'static str, scenario: &Scenario, schedule: Schedule) -> Result<SolveReport, SolveError> {
    let value = evaluate_min_avg_snr(&schedule, scenario)?;
    Ok(SolveReport {
        solver,
        objective: Objective::MinAvgSnr(value),
        meta: SolveMeta { iterations: scenario.horizon(), ..Default::default() },
        schedule,
    })
}

/// Nearest-SCBS association for every slot.
pub fn baseline_distance(scenario: &Scenario) -> Result<SolveReport, SolveError> {
    let nearest: Vec<usize> = (0..scenario.num_users()).map(|k| scenario.nearest(k)).collect();
    let schedule = run_association(scenario, |_| nearest.clone())?;
    report("distance", scenario, schedule)
}

/// Myopic association: in user order, each user picks the SCBS offering
/// the best SNR given an equal share of that SCBS's current budget among
/// the users that already picked it.
pub fn baseline_snr_greedy(scenario: &Scenario) -> Result<SolveReport, SolveError> {
    let schedule = run_association(scenario, |ledger| {
        let budgets = ledger.budgets();
        let mut takers = vec![0usize; scenario.num_scbs()];
        (0..scenario.num_users())
            .map(|k| {
                let mut best = (0, f64::NEG_INFINITY);
                for (m, b) in budgets.iter().enumerate() {
                    let score = scenario.gain(k, m) * b / (takers[m] + 1) as f64;
                    if score > best.1 {
                        best = (m, score);
                    }
                }
                takers[best.0] += 1;
                best.0
            })
            .collect()
    })?;
    report("snr-greedy", scenario, schedule)
}
