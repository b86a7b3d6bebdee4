use super::{Assignment, EnergyLedger, Scenario, Schedule};

fn fits(load: f64, budget: f64) -> bool {
    load <= budget * (1.0 + 1e-12)
}

/// Assigns every user to one SCBS so that no SCBS spends more than its
/// budget. `cost[k][m]` is the energy user `k` needs from SCBS `m`, `None`
/// when the link is unusable.
///
/// Two constructions are tried, each followed by bounded local repair:
/// the minimum-total-energy assignment (everyone on their cheapest link),
/// and a regret-ordered first fit. Repair moves users off overloaded SCBSs
/// one at a time, or swaps pairs of users across SCBSs, for at most K²
/// steps. Any returned assignment respects every budget.
pub fn assign_slot(cost: &[Vec<Option<f64>>], budgets: &[f64]) -> Option<Vec<usize>> {
    let cheapest: Vec<usize> = cost
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(m, c)| c.map(|c| (m, c)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(m, _)| m)
        })
        .collect::<Option<_>>()?;

    repair(cost, budgets, cheapest).or_else(|| repair(cost, budgets, regret_first_fit(cost, budgets)))
}

fn regret_first_fit(cost: &[Vec<Option<f64>>], budgets: &[f64]) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = cost
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let mut cs: Vec<f64> = row.iter().flatten().copied().collect();
            cs.sort_by(f64::total_cmp);
            let regret = if cs.len() > 1 { cs[1] - cs[0] } else { f64::INFINITY };
            (regret, k)
        })
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut load = vec![0.0; budgets.len()];
    let mut assign = vec![0; cost.len()];
    for (_, k) in order {
        let mut options: Vec<(f64, usize)> =
            cost[k].iter().enumerate().filter_map(|(m, c)| c.map(|c| (c, m))).collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let pick = options
            .iter()
            .find(|(c, m)| fits(load[*m] + c, budgets[*m]))
            .or(options.first())
            .map(|&(_, m)| m)
            .expect("every user has a usable link");
        load[pick] += cost[k][pick].expect("usable");
        assign[k] = pick;
    }
    assign
}

fn repair(cost: &[Vec<Option<f64>>], budgets: &[f64], mut assign: Vec<usize>) -> Option<Vec<usize>> {
    let users = cost.len();
    let c = |k: usize, m: usize| cost[k][m];
    let mut load = vec![0.0; budgets.len()];
    for (k, &m) in assign.iter().enumerate() {
        load[m] += c(k, m).expect("assigned links are usable");
    }
    let overload = |load: &[f64], m: usize| (load[m] - budgets[m]).max(0.0);

    for _ in 0..=users * users {
        let worst = (0..budgets.len())
            .filter(|&m| !fits(load[m], budgets[m]))
            .max_by(|&a, &b| overload(&load, a).total_cmp(&overload(&load, b)));
        let Some(m) = worst else {
            return Some(assign);
        };

        // Cheapest single move off the overloaded SCBS.
        let mut best_move: Option<(f64, usize, usize)> = None;
        for k in (0..users).filter(|&k| assign[k] == m) {
            let here = c(k, m).expect("usable");
            if here <= 0.0 {
                continue;
            }
            for (m2, there) in cost[k].iter().enumerate() {
                let Some(there) = *there else { continue };
                if m2 == m || !fits(load[m2] + there, budgets[m2]) {
                    continue;
                }
                let extra = there - here;
                if best_move.is_none_or(|(e, _, _)| extra < e) {
                    best_move = Some((extra, k, m2));
                }
            }
        }
        if let Some((_, k, m2)) = best_move {
            load[m] -= c(k, m).expect("usable");
            load[m2] += c(k, m2).expect("usable");
            assign[k] = m2;
            continue;
        }

        // Otherwise the pairwise swap that relieves `m` the most.
        let mut best_swap: Option<(f64, usize, usize)> = None;
        for k in (0..users).filter(|&k| assign[k] == m) {
            for k2 in (0..users).filter(|&k2| assign[k2] != m) {
                let m2 = assign[k2];
                let (Some(k_m), Some(k_m2), Some(k2_m), Some(k2_m2)) = (c(k, m), c(k, m2), c(k2, m), c(k2, m2)) else {
                    continue;
                };
                let new_m = load[m] - k_m + k2_m;
                let new_m2 = load[m2] - k2_m2 + k_m2;
                if new_m >= load[m] || !fits(new_m2, budgets[m2]) {
                    continue;
                }
                let relief = load[m] - new_m;
                if best_swap.is_none_or(|(r, _, _)| relief > r) {
                    best_swap = Some((relief, k, k2));
                }
            }
        }
        let (_, k, k2) = best_swap?;
        let m2 = assign[k2];
        load[m] += c(k2, m).expect("usable") - c(k, m).expect("usable");
        load[m2] += c(k, m2).expect("usable") - c(k2, m2).expect("usable");
        assign.swap(k, k2);
    }
    None
}

/// Per-slot budgets that keep an SCBS sustainable: its stored energy plus
/// its future harvest spread evenly over the remaining slots, but never
/// less than what would otherwise overflow the battery.
fn sustainable_budgets(scenario: &Scenario, ledger: &EnergyLedger<'_>) -> Vec<f64> {
    let remaining = (scenario.horizon() - ledger.slot()) as f64;
    (0..scenario.num_scbs())
        .map(|m| {
            let avail = ledger.available(m);
            let share = (ledger.level(m) + remaining * scenario.harvest_j(m)) / remaining;
            let overflow_floor = avail - scenario.scbs()[m].capacity.joules();
            share.max(overflow_floor).min(avail)
        })
        .collect()
}

/// Tries to give every user an SNR of at least `gamma` in every slot.
///
/// Slots are processed in order. Each slot is first assigned under
/// sustainable budgets and, failing that, under the full available energy.
/// Returns a causal witness schedule, or `None` when some slot cannot be
/// completed. A `None` does not prove infeasibility.
pub fn feasibility(gamma: f64, scenario: &Scenario) -> Option<Schedule> {
    let radio = scenario.radio();
    let users = scenario.num_users();
    let power: Vec<Vec<Option<f64>>> = (0..users)
        .map(|k| {
            (0..scenario.num_scbs())
                .map(|m| {
                    let p = radio.power_for_snr(gamma, scenario.distance(k, m));
                    (!radio.exceeds_cap(p)).then_some(p)
                })
                .collect()
        })
        .collect();
    let cost: Vec<Vec<Option<f64>>> =
        power.iter().map(|row| row.iter().map(|p| p.map(|p| p * scenario.slot_s())).collect()).collect();

    let mut ledger = EnergyLedger::new(scenario);
    let mut slots = Vec::with_capacity(scenario.horizon());
    for _ in 0..scenario.horizon() {
        let assign = assign_slot(&cost, &sustainable_budgets(scenario, &ledger))
            .or_else(|| assign_slot(&cost, &ledger.budgets()))?;
        let mut spend = vec![0.0; scenario.num_scbs()];
        let row: Vec<Assignment> = assign
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let p = power[k][m].expect("assigned links are usable");
                spend[m] += p * scenario.slot_s();
                Assignment { scbs: m, power_w: p }
            })
            .collect();
        ledger.commit(&spend).expect("slot assignment respects budgets");
        slots.push(row);
    }
    Some(Schedule::new(slots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operation::{evaluate_min_avg_snr, ScenarioScbs};
    use crate::spatial::{Point, RadioConfig};

    #[test]
    fn zero_target_is_feasible() {
        let s = Scenario::new(
            vec![ScenarioScbs::off_grid(Point::new(0.0, 0.0), 0.0)],
            vec![Point::new(10.0, 0.0)],
            RadioConfig::default(),
            3,
            1.0,
        )
        .unwrap();
        let sch = feasibility(0.0, &s).unwrap();
        assert!(sch.slots.iter().flatten().all(|a| a.power_w == 0.0));
    }

    #[test]
    fn insufficient_horizon_energy_is_infeasible() {
        let r = RadioConfig::default();
        let s = Scenario::new(
            vec![ScenarioScbs::off_grid(Point::new(0.0, 0.0), 1e-6)],
            vec![Point::new(10.0, 0.0), Point::new(0.0, 10.0)],
            r,
            4,
            1.0,
        )
        .unwrap();
        // each user-slot needs γ σ² 10^4 J; total 8 γ 1e-9 > 4e-6 for γ = 600
        assert!(feasibility(600.0, &s).is_none());
        let ok = feasibility(400.0, &s).unwrap();
        assert!(evaluate_min_avg_snr(&ok, &s).unwrap() >= 400.0 * (1.0 - 1e-12));
    }

    #[test]
    fn assign_slot_moves_and_swaps() {
        // both users prefer SCBS 0, which can only afford one of them
        let cost = vec![vec![Some(1.0), Some(3.0)], vec![Some(1.0), Some(1.5)]];
        let a = assign_slot(&cost, &[1.0, 2.0]).unwrap();
        assert_eq!(a, vec![0, 1]);
        // swap needed: k0 sits on 0 (cost 2), k1 on 1; only exchanging fits
        let cost = vec![vec![Some(2.0), Some(1.0)], vec![Some(1.0), Some(2.0)]];
        assert_eq!(assign_slot(&cost, &[1.0, 1.0]).unwrap(), vec![1, 0]);
        assert!(assign_slot(&cost, &[0.5, 0.5]).is_none());
        let blocked = vec![vec![None, None]];
        assert!(assign_slot(&blocked, &[1.0, 1.0]).is_none());
    }
}
