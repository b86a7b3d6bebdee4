use crate::deployment::Capacity;

use super::{
    covers, evaluate_grid_energy, Assignment, Objective, Scenario, Schedule, SolveError, SolveMeta, SolveReport,
};

pub const ORACLE_MAX_HORIZON: usize = 12;
pub const ORACLE_MAX_SCBS: usize = 4;

/// Single-user, single-grid-SCBS instance with fixed per-slot service
/// energies `e_m = γ_th σ² d_m^α τ`.
struct GridProblem<'a> {
    scenario: &'a Scenario,
    grid: usize,
    /// EH SCBSs whose link fits the power cap, in index order.
    eh: Vec<usize>,
    demand_j: Vec<f64>,
}

impl<'a> GridProblem<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self, SolveError> {
        if scenario.num_users() != 1 {
            return Err(SolveError::Unsupported(format!(
                "grid-power minimization needs exactly one user, found {}",
                scenario.num_users()
            )));
        }
        let grids = scenario.grid_indices();
        if grids.len() != 1 {
            return Err(SolveError::Unsupported(format!(
                "grid-power minimization needs exactly one grid-connected SCBS, found {}",
                grids.len()
            )));
        }
        let radio = scenario.radio();
        let mut eh = Vec::new();
        let mut demand_j = Vec::with_capacity(scenario.num_scbs());
        for m in 0..scenario.num_scbs() {
            let p = radio.power_for_snr(radio.gamma_th, scenario.distance(0, m));
            demand_j.push(p * scenario.slot_s());
            if radio.exceeds_cap(p) {
                if m == grids[0] {
                    return Err(SolveError::GridInfeasible);
                }
            } else if m != grids[0] {
                eh.push(m);
            }
        }
        Ok(Self { scenario, grid: grids[0], eh, demand_j })
    }

    fn initial_levels(&self) -> Vec<f64> {
        self.eh.iter().map(|&m| self.scenario.scbs()[m].initial_battery_j).collect()
    }

    fn available(&self, levels: &[f64], i: usize) -> f64 {
        levels[i] + self.scenario.harvest_j(self.eh[i])
    }

    fn can_serve(&self, levels: &[f64], i: usize) -> bool {
        covers(self.available(levels, i), self.demand_j[self.eh[i]])
    }

    /// Advances one slot; `serving` is a position in `eh`, or `None` for
    /// the grid.
    fn step(&self, levels: &[f64], serving: Option<usize>) -> Vec<f64> {
        (0..levels.len())
            .map(|i| {
                let mut e = self.available(levels, i);
                if serving == Some(i) {
                    e = (e - self.demand_j[self.eh[i]]).max(0.0);
                }
                self.scenario.scbs()[self.eh[i]].capacity.clip(e).0
            })
            .collect()
    }

    fn report(
        &self,
        solver: &'static str,
        serving: &[Option<usize>],
        critical_slot: Option<usize>,
    ) -> Result<SolveReport, SolveError> {
        let slots = serving
            .iter()
            .map(|s| {
                let m = s.map_or(self.grid, |i| self.eh[i]);
                vec![Assignment { scbs: m, power_w: self.demand_j[m] / self.scenario.slot_s() }]
            })
            .collect();
        let schedule = Schedule::new(slots);
        let grid_j = evaluate_grid_energy(&schedule, self.scenario)?;
        Ok(SolveReport {
            solver,
            objective: Objective::GridEnergyJ(grid_j),
            meta: SolveMeta {
                iterations: serving.len(),
                critical_slot,
                grid_slots: Some(serving.iter().filter(|s| s.is_none()).count()),
                ..Default::default()
            },
            schedule,
        })
    }

    /// EH positions serving the last `len` slots, or `None` if those slots
    /// cannot all be covered by harvested energy.
    fn suffix_plan(&self, len: usize) -> Option<Vec<usize>> {
        let horizon = self.scenario.horizon();
        let mut start = self.initial_levels();
        for _ in 0..horizon - len {
            start = self.step(&start, None);
        }
        if len == 0 {
            return Some(Vec::new());
        }
        if self.eh.is_empty() {
            return None;
        }
        self.round_robin(&start, len).or_else(|| self.exhaustive_suffix(&start, len))
    }

    fn round_robin(&self, start: &[f64], len: usize) -> Option<Vec<usize>> {
        let n = self.eh.len();
        let mut levels = start.to_vec();
        let mut next = 0;
        let mut plan = Vec::with_capacity(len);
        for _ in 0..len {
            let i = (0..n).map(|j| (next + j) % n).find(|&i| self.can_serve(&levels, i))?;
            levels = self.step(&levels, Some(i));
            plan.push(i);
            next = (i + 1) % n;
        }
        Some(plan)
    }

    /// Layered search over battery states with dominance pruning.
    fn exhaustive_suffix(&self, start: &[f64], len: usize) -> Option<Vec<usize>> {
        struct State {
            levels: Vec<f64>,
            parent: usize,
            choice: usize,
        }
        let mut layers: Vec<Vec<State>> = vec![vec![State { levels: start.to_vec(), parent: 0, choice: 0 }]];
        for _ in 0..len {
            let prev = layers.last().expect("non-empty");
            let mut next: Vec<State> = Vec::new();
            for (p, st) in prev.iter().enumerate() {
                for i in (0..self.eh.len()).filter(|&i| self.can_serve(&st.levels, i)) {
                    let levels = self.step(&st.levels, Some(i));
                    if next.iter().any(|o| o.levels.iter().zip(&levels).all(|(a, b)| a >= b)) {
                        continue;
                    }
                    next.retain(|o| !o.levels.iter().zip(&levels).all(|(a, b)| a <= b));
                    next.push(State { levels, parent: p, choice: i });
                }
            }
            if next.is_empty() {
                return None;
            }
            layers.push(next);
        }
        let mut plan = vec![0; len];
        let mut idx = 0;
        for depth in (1..=len).rev() {
            let st = &layers[depth][idx];
            plan[depth - 1] = st.choice;
            idx = st.parent;
        }
        Some(plan)
    }

    fn search(&self, t: usize, levels: &[f64], grid_used: usize, best: &mut usize) {
        if grid_used >= *best {
            return;
        }
        if t == self.scenario.horizon() {
            *best = grid_used;
            return;
        }
        for i in 0..self.eh.len() {
            if self.can_serve(levels, i) {
                self.search(t + 1, &self.step(levels, Some(i)), grid_used, best);
            }
        }
        self.search(t + 1, &self.step(levels, None), grid_used + 1, best);
    }
}

/// Offline strategy: the grid serves slots `1..=t*` and harvested energy
/// serves the rest, where `t*` is the earliest slot after which every
/// remaining slot can be covered by the EH-SCBSs (using the full future
/// harvest profile). EH-SCBSs take turns in index order.
pub fn save_transmit(scenario: &Scenario) -> Result<SolveReport, SolveError> {
    let p = GridProblem::new(scenario)?;
    let horizon = scenario.horizon();
    let (len, plan) = (0..=horizon)
        .rev()
        .find_map(|len| p.suffix_plan(len).map(|plan| (len, plan)))
        .expect("an empty suffix is always feasible");
    let critical = horizon - len;
    let serving: Vec<Option<usize>> = std::iter::repeat_n(None, critical).chain(plan.into_iter().map(Some)).collect();
    p.report("save", &serving, Some(critical))
}

/// Causal strategy: each slot the first EH-SCBS (by index) whose battery
/// covers the demand serves the user; otherwise the grid does.
pub fn greedy_transmit(scenario: &Scenario) -> Result<SolveReport, SolveError> {
    let p = GridProblem::new(scenario)?;
    let mut levels = p.initial_levels();
    let mut serving = Vec::with_capacity(scenario.horizon());
    for _ in 0..scenario.horizon() {
        let choice = (0..p.eh.len()).find(|&i| p.can_serve(&levels, i));
        levels = p.step(&levels, choice);
        serving.push(choice);
    }
    p.report("greedy", &serving, None)
}

/// Minimum number of grid-served slots over every causal serving sequence,
/// by exhaustive search.
pub fn grid_optimality_oracle(scenario: &Scenario) -> Result<usize, SolveError> {
    if scenario.horizon() > ORACLE_MAX_HORIZON || scenario.num_scbs() > ORACLE_MAX_SCBS {
        return Err(SolveError::InstanceTooLarge { horizon: scenario.horizon(), scbs: scenario.num_scbs() });
    }
    let p = GridProblem::new(scenario)?;
    let mut best = scenario.horizon();
    p.search(0, &p.initial_levels(), 0, &mut best);
    Ok(best)
}

/// Runs both strategies and, when every EH battery is unbounded, checks
/// that they draw the same grid energy.
pub fn compare_grid_strategies(scenario: &Scenario) -> Result<(SolveReport, SolveReport), SolveError> {
    let save = save_transmit(scenario)?;
    let greedy = greedy_transmit(scenario)?;
    let unbounded = scenario.scbs().iter().all(|b| b.grid_connected || b.capacity == Capacity::Unbounded);
    if unbounded && save.objective.value() != greedy.objective.value() {
        return Err(SolveError::StrategyMismatch { save: save.objective.value(), greedy: greedy.objective.value() });
    }
    Ok((save, greedy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operation::ScenarioScbs;
    use crate::spatial::{Point, RadioConfig};

    // Radio chosen so a user at 10 m needs exactly 1 W: γ σ² 10^4 = 1.
    fn radio() -> RadioConfig {
        RadioConfig { gamma_th: 1e9, alpha: 4.0, noise_w: 1e-13, d_min_m: 1.0, p_max_w: None }
    }

    fn instance(horizon: usize, eh: &[(f64, Capacity)]) -> Scenario {
        let mut scbs =
            vec![ScenarioScbs { grid_connected: true, ..ScenarioScbs::off_grid(Point::new(0.0, -10.0), 0.0) }];
        for &(rate, capacity) in eh {
            scbs.push(ScenarioScbs { capacity, ..ScenarioScbs::off_grid(Point::new(0.0, 10.0), rate) });
        }
        Scenario::new(scbs, vec![Point::new(0.0, 0.0)], radio(), horizon, 1.0).unwrap()
    }

    fn serving(r: &SolveReport) -> Vec<usize> {
        r.schedule.slots.iter().map(|row| row[0].scbs).collect()
    }

    #[test]
    fn no_harvest_means_all_grid() {
        let s = instance(5, &[(0.0, Capacity::Unbounded)]);
        let save = save_transmit(&s).unwrap();
        assert_eq!(save.meta.critical_slot, Some(5));
        assert_eq!(greedy_transmit(&s).unwrap().meta.grid_slots, Some(5));
        assert_eq!(grid_optimality_oracle(&s).unwrap(), 5);
        assert!((save.objective.value() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn rate_matched_needs_no_grid() {
        let s = instance(6, &[(1.0, Capacity::Unbounded)]);
        assert_eq!(save_transmit(&s).unwrap().meta.critical_slot, Some(0));
        assert_eq!(greedy_transmit(&s).unwrap().meta.grid_slots, Some(0));
        assert_eq!(grid_optimality_oracle(&s).unwrap(), 0);
    }

    #[test]
    fn half_rate_serves_every_second_slot() {
        let s = instance(6, &[(0.5, Capacity::Unbounded)]);
        let g = greedy_transmit(&s).unwrap();
        assert_eq!(serving(&g), vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn six_deferred_slots() {
        let s = instance(10, &[(0.6, Capacity::Unbounded)]);
        let save = save_transmit(&s).unwrap();
        assert_eq!(save.meta.critical_slot, Some(4));
        assert_eq!(serving(&save), vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
        let greedy = greedy_transmit(&s).unwrap();
        assert_eq!(greedy.meta.grid_slots, Some(4));
        assert_eq!(save.objective, greedy.objective);
        assert_eq!(grid_optimality_oracle(&s).unwrap(), 4);
    }

    #[test]
    fn two_eh_take_turns() {
        let s = instance(6, &[(0.5, Capacity::Unbounded), (0.5, Capacity::Unbounded)]);
        let save = save_transmit(&s).unwrap();
        assert_eq!(save.meta.critical_slot, Some(1));
        assert_eq!(&serving(&save)[1..], &[1, 2, 1, 2, 1]);
        assert!(compare_grid_strategies(&s).is_ok());
    }

    #[test]
    fn mismatched_scenarios_rejected() {
        let s = instance(3, &[(0.5, Capacity::Unbounded)]);
        let two_users =
            Scenario::new(s.scbs().to_vec(), vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)], radio(), 3, 1.0)
                .unwrap();
        assert!(matches!(save_transmit(&two_users), Err(SolveError::Unsupported(_))));
        let no_grid = Scenario::new(s.scbs()[1..].to_vec(), s.users().to_vec(), radio(), 3, 1.0).unwrap();
        assert!(matches!(greedy_transmit(&no_grid), Err(SolveError::Unsupported(_))));
        let capped =
            Scenario::new(s.scbs().to_vec(), s.users().to_vec(), RadioConfig { p_max_w: Some(0.5), ..radio() }, 3, 1.0)
                .unwrap();
        assert_eq!(save_transmit(&capped).unwrap_err(), SolveError::GridInfeasible);
        let long = instance(13, &[(0.5, Capacity::Unbounded)]);
        assert!(matches!(grid_optimality_oracle(&long), Err(SolveError::InstanceTooLarge { .. })));
    }
}
