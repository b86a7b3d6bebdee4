use crate::energy::HarvesterModel;
use crate::spatial::{LinkPower, Point};

use super::BatteryState;

#[derive(Debug, Clone, PartialEq)]
pub struct ScbsNode {
    pub position: Point,
    pub harvester: HarvesterModel,
    pub battery: BatteryState,
    pub grid_connected: bool,
    pub circuit_power_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    pub served: usize,
    pub unserved: usize,
    pub grid_drawn_j: f64,
    /// Transmit plus circuit energy consumed this slot.
    pub spent_j: f64,
    pub overflow_j: f64,
    pub battery: BatteryState,
    pub served_mask: Vec<bool>,
}

impl SlotOutcome {
    /// Relative residual of
    /// `harvested + battery_before + grid = spent + battery_after + overflow`.
    pub fn conservation_error(&self, battery_before_j: f64, harvested_j: f64) -> f64 {
        let inflow = harvested_j + battery_before_j + self.grid_drawn_j;
        let outflow = self.spent_j + self.battery.level_j + self.overflow_j;
        let scale = inflow.abs().max(outflow.abs());
        if scale == 0.0 {
            0.0
        } else {
            (inflow - outflow).abs() / scale
        }
    }
}

/// Advances one base station by one slot.
///
/// Off-grid nodes serve the cheapest users first until the budget runs out,
/// which maximizes the served count under a single budget. If the circuit
/// energy cannot be covered the node stays dark and stores what it has.
/// On-grid nodes serve every reachable user, spending harvested and stored
/// energy first and drawing the shortfall from the grid. Links marked
/// infeasible are never served.
pub fn step_slot(node: &ScbsNode, demands: &[LinkPower], harvested_j: f64, slot_s: f64) -> SlotOutcome {
    let circuit_j = node.circuit_power_w * slot_s;
    let pool = node.battery.level_j + harvested_j;
    let mut served_mask = vec![false; demands.len()];
    let mut served = 0;

    let (spent_j, grid_drawn_j, leftover) = if node.grid_connected {
        let mut transmit = 0.0;
        for (mask, d) in served_mask.iter_mut().zip(demands) {
            if let LinkPower::Feasible(p) = d {
                transmit += p * slot_s;
                *mask = true;
                served += 1;
            }
        }
        let required = transmit + circuit_j;
        ((required), (required - pool).max(0.0), (pool - required).max(0.0))
    } else if pool < circuit_j {
        (0.0, 0.0, pool)
    } else {
        let budget = pool - circuit_j;
        let mut order: Vec<(f64, usize)> =
            demands.iter().enumerate().filter_map(|(k, d)| d.watts().map(|p| (p * slot_s, k))).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut transmit = 0.0;
        for (e, k) in order {
            if transmit + e > budget {
                break;
            }
            transmit += e;
            served_mask[k] = true;
            served += 1;
        }
        (circuit_j + transmit, 0.0, budget - transmit)
    };

    let (level_j, overflow_j) = node.battery.capacity.clip(leftover);
    SlotOutcome {
        served,
        unserved: demands.len() - served,
        grid_drawn_j,
        spent_j,
        overflow_j,
        battery: BatteryState { capacity: node.battery.capacity, level_j },
        served_mask,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::Capacity;
    use proptest::prelude::*;

    fn node(capacity: Capacity, level: f64, grid: bool) -> ScbsNode {
        ScbsNode {
            position: Point::new(0.0, 0.0),
            harvester: HarvesterModel::Constant { rate_w: 0.0 },
            battery: BatteryState { capacity, level_j: level },
            grid_connected: grid,
            circuit_power_w: 0.0,
        }
    }

    fn watts(v: &[f64]) -> Vec<LinkPower> {
        v.iter().map(|p| LinkPower::Feasible(*p)).collect()
    }

    #[test]
    fn capacity_clipping_with_no_users() {
        let n = node(Capacity::Finite(3.0), 0.0, false);
        let out = step_slot(&n, &[], 5.0, 1.0);
        assert_eq!((out.served, out.grid_drawn_j, out.battery.level_j, out.overflow_j), (0, 0.0, 3.0, 2.0));
        assert_eq!(out.conservation_error(0.0, 5.0), 0.0);
    }

    #[test]
    fn off_grid_serves_cheapest() {
        let n = node(Capacity::Unbounded, 0.0, false);
        let out = step_slot(&n, &watts(&[4.0, 1.0, 2.0]), 3.0, 1.0);
        assert_eq!(out.served, 2);
        assert_eq!(out.unserved, 1);
        assert_eq!(out.served_mask, vec![false, true, true]);
        assert_eq!(out.battery.level_j, 0.0);
    }

    #[test]
    fn on_grid_exhausts_harvest_first() {
        let n = node(Capacity::Unbounded, 1.0, true);
        let out = step_slot(&n, &watts(&[2.5, 2.5, 5.0]), 3.0, 1.0);
        assert_eq!(out.served, 3);
        assert_eq!(out.grid_drawn_j, 6.0);
        assert_eq!(out.battery.level_j, 0.0);
    }

    #[test]
    fn infeasible_links_never_served() {
        let n = node(Capacity::Unbounded, 100.0, true);
        let out = step_slot(&n, &[LinkPower::Infeasible, LinkPower::Feasible(1.0)], 0.0, 1.0);
        assert_eq!((out.served, out.unserved), (1, 1));
        assert_eq!(out.battery.level_j, 99.0);
    }

    #[test]
    fn circuit_power_blocks_off_grid_node() {
        let mut n = node(Capacity::Unbounded, 0.0, false);
        n.circuit_power_w = 2.0;
        let out = step_slot(&n, &watts(&[0.1]), 1.0, 1.0);
        assert_eq!(out.served, 0);
        assert_eq!(out.spent_j, 0.0);
        assert_eq!(out.battery.level_j, 1.0);

        let out = step_slot(&n, &watts(&[0.5, 0.6]), 2.6, 1.0);
        assert_eq!(out.served, 1);
        assert!((out.spent_j - 2.5).abs() < 1e-12);

        let mut g = node(Capacity::Finite(1.0), 0.0, true);
        g.circuit_power_w = 2.0;
        let out = step_slot(&g, &watts(&[1.0]), 0.5, 1.0);
        assert!((out.grid_drawn_j - 2.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn conservation_and_bounds(
            powers in prop::collection::vec(0.0..5.0f64, 0..12),
            level in 0.0..10.0f64,
            harvested in 0.0..10.0f64,
            cap in prop::option::of(0.0..10.0f64),
            grid in any::<bool>(),
            circuit in 0.0..1.0f64,
            slot in 0.1..3.0f64,
        ) {
            let capacity = cap.map_or(Capacity::Unbounded, Capacity::Finite);
            let level = level.min(capacity.joules());
            let mut n = node(capacity, level, grid);
            n.circuit_power_w = circuit;
            let out = step_slot(&n, &watts(&powers), harvested, slot);
            prop_assert!(out.conservation_error(level, harvested) <= 1e-9);
            prop_assert!(out.battery.level_j >= 0.0);
            prop_assert!(out.battery.level_j <= capacity.joules());
            prop_assert_eq!(out.served + out.unserved, powers.len());
            if grid { prop_assert_eq!(out.served, powers.len()); }
        }
    }
}
