//! Day-ahead appliance scheduling for one household.
//!
//! The objective is electricity cost on PV-netted, zero-clipped demand plus a
//! convenience penalty proportional to how far each appliance's on-slots move
//! from their baseline. Two solvers share one evaluation core:
//! [`optimize_exact`] (depth-first branch and bound) and
//! [`optimize_heuristic`] (greedy construction and local search).

mod exact;
mod heuristic;
mod ladder;
mod workspace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    aggregate_power, net_billable_load, Household, ModelError, PriceProfile, PvProfile, Schedule,
    MD_TOLERANCE_KW, SLOT_HOURS,
};

pub use exact::optimize_exact;
pub use heuristic::optimize_heuristic;
pub use ladder::{solve, solve_penalty_ladder, SolverKind, SolverSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedulerError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("appliance {appliance}: scheduled for {found} slots, requires {expected}")]
    DurationViolation {
        appliance: usize,
        expected: usize,
        found: usize,
    },
    #[error("schedule violates {} constraint(s)", .0.violations.len())]
    InfeasibleSchedule(FeasibilityReport),
    #[error("no schedule satisfies the maximum-demand and window constraints")]
    NoFeasibleSchedule,
    #[error("search budget exhausted before any feasible schedule was found")]
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Daily energy bill on billable demand, $.
    pub electricity_cost: f64,
    /// Daily convenience penalty, $.
    pub penalty_cost: f64,
    /// Shift distance per appliance, in slots.
    pub shift_slots: Vec<usize>,
}

impl CostBreakdown {
    pub fn objective(&self) -> f64 {
        self.electricity_cost + self.penalty_cost
    }

    pub fn total_shift_slots(&self) -> usize {
        self.shift_slots.iter().sum()
    }
}

/// Penalty part of a [`CostBreakdown`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPenalty {
    pub penalty_cost: f64,
    pub shift_slots: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveBudget {
    /// Branch-and-bound node cap.
    pub max_nodes: u64,
    /// Wall-clock cap. Hitting it makes results machine-dependent, so keep
    /// it well above what `max_nodes` allows.
    pub time_limit_s: f64,
    /// Extra randomized greedy starts for the heuristic.
    pub restarts: u32,
}

impl Default for SolveBudget {
    fn default() -> Self {
        Self {
            max_nodes: 2_000_000,
            time_limit_s: 600.0,
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Search completed; the objective is globally minimal.
    Optimal,
    /// Node or time cap hit; the best incumbent is returned.
    BudgetExhausted,
    /// Produced by the heuristic; no optimality claim.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub schedule: Schedule,
    pub costs: CostBreakdown,
    pub status: SolveStatus,
    /// Branch-and-bound nodes visited (zero for the heuristic).
    pub nodes: u64,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// One household's scheduling problem.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub household: &'a Household,
    pub price: &'a PriceProfile,
    pub pv: &'a PvProfile,
    /// Penalty price, $/kWh per slot of displacement.
    pub penalty_price: f64,
}

impl<'a> Problem<'a> {
    pub fn new(household: &'a Household, price: &'a PriceProfile, pv: &'a PvProfile, penalty_price: f64) -> Self {
        Self {
            household,
            price,
            pv,
            penalty_price,
        }
    }

    fn check_dimensions(&self) -> Result<(), SchedulerError> {
        let horizon = self.household.horizon();
        for found in [self.price.len(), self.pv.len()] {
            if found != horizon {
                return Err(ModelError::DimensionMismatch {
                    expected: horizon,
                    found,
                }
                .into());
            }
        }
        if let Some(a) = self.household.appliances.iter().find(|a| a.window_end >= horizon) {
            return Err(ModelError::WindowOutsideHorizon {
                id: a.id.clone(),
                end: a.window_end,
                horizon,
            }
            .into());
        }
        Ok(())
    }
}

/// `0.5 h × Σ billable(t) · price(t)`.
pub fn electricity_cost(billable_kw: &[f64], price: &PriceProfile) -> Result<f64, SchedulerError> {
    if billable_kw.len() != price.len() {
        return Err(ModelError::DimensionMismatch {
            expected: price.len(),
            found: billable_kw.len(),
        }
        .into());
    }
    Ok(SLOT_HOURS
        * billable_kw
            .iter()
            .zip(&price.price_per_kwh)
            .map(|(p, c)| p * c)
            .sum::<f64>())
}

/// Slot displacement between two on-slot lists of equal length, paired in
/// ascending order.
pub fn shift_distance(new_slots: &[usize], old_slots: &[usize]) -> usize {
    new_slots
        .iter()
        .zip(old_slots)
        .map(|(&n, &o)| n.abs_diff(o))
        .sum()
}

/// Convenience penalty of moving from `old` to `new`.
pub fn shift_penalty(
    new: &Schedule,
    old: &Schedule,
    household: &Household,
    penalty_price: f64,
) -> Result<ShiftPenalty, SchedulerError> {
    let count = household.appliances.len();
    for s in [new, old] {
        if s.appliance_count() != count {
            return Err(ModelError::DimensionMismatch {
                expected: count,
                found: s.appliance_count(),
            }
            .into());
        }
    }
    let mut shift_slots = Vec::with_capacity(count);
    let mut weighted = 0.0;
    for (a, appliance) in household.appliances.iter().enumerate() {
        let n = new.on_slots(a);
        let o = old.on_slots(a);
        for found in [n.len(), o.len()] {
            if found != appliance.duration_slots {
                return Err(SchedulerError::DurationViolation {
                    appliance: a,
                    expected: appliance.duration_slots,
                    found,
                });
            }
        }
        let shift = shift_distance(&n, &o);
        weighted += shift as f64 * appliance.rated_power_kw;
        shift_slots.push(shift);
    }
    Ok(ShiftPenalty {
        penalty_cost: SLOT_HOURS * penalty_price * weighted,
        shift_slots,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    MaxDemand { slot: usize, load_kw: f64, md_kw: f64 },
    Duration { appliance: usize, expected: usize, found: usize },
    Window { appliance: usize, slot: usize },
    Contiguity { appliance: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks maximum demand, duration, window and contiguity.
pub fn is_feasible(schedule: &Schedule, household: &Household) -> Result<FeasibilityReport, SchedulerError> {
    let load = aggregate_power(schedule, household)?;
    let mut violations = Vec::new();
    for (slot, &load_kw) in load.iter().enumerate() {
        if load_kw > household.md_kw + MD_TOLERANCE_KW {
            violations.push(Violation::MaxDemand {
                slot,
                load_kw,
                md_kw: household.md_kw,
            });
        }
    }
    for (a, appliance) in household.appliances.iter().enumerate() {
        let slots = schedule.on_slots(a);
        if slots.len() != appliance.duration_slots {
            violations.push(Violation::Duration {
                appliance: a,
                expected: appliance.duration_slots,
                found: slots.len(),
            });
        }
        for &slot in &slots {
            if slot < appliance.window_start || slot > appliance.window_end {
                violations.push(Violation::Window { appliance: a, slot });
            }
        }
        if !appliance.interruptible && slots.windows(2).any(|w| w[1] != w[0] + 1) {
            violations.push(Violation::Contiguity { appliance: a });
        }
    }
    Ok(FeasibilityReport { violations })
}

/// Full objective breakdown of a feasible schedule against the household's
/// baseline.
pub fn total_cost(
    schedule: &Schedule,
    household: &Household,
    price: &PriceProfile,
    pv: &PvProfile,
    penalty_price: f64,
) -> Result<CostBreakdown, SchedulerError> {
    let report = is_feasible(schedule, household)?;
    if !report.is_feasible() {
        return Err(SchedulerError::InfeasibleSchedule(report));
    }
    let gross = aggregate_power(schedule, household)?;
    let billable = net_billable_load(&gross, pv, household.pv_installed)?;
    let electricity_cost = electricity_cost(&billable, price)?;
    let penalty = shift_penalty(schedule, &household.baseline_schedule(), household, penalty_price)?;
    Ok(CostBreakdown {
        electricity_cost,
        penalty_cost: penalty.penalty_cost,
        shift_slots: penalty.shift_slots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;

    fn flat(price: f64, n: usize) -> PriceProfile {
        PriceProfile::new(vec![price; n]).unwrap()
    }

    #[test]
    fn electricity_cost_examples() {
        assert_eq!(electricity_cost(&[0.0; 4], &flat(0.3, 4)).unwrap(), 0.0);
        let mut load = vec![0.0; 8];
        load[..4].fill(2.0);
        assert!((electricity_cost(&load, &flat(0.10, 8)).unwrap() - 0.40).abs() < 1e-12);
        let price = PriceProfile::new(vec![0.1, 0.2]).unwrap();
        assert!((electricity_cost(&[1.0, 3.0], &price).unwrap() - 0.35).abs() < 1e-12);
        assert!(electricity_cost(&[1.0], &price).is_err());
    }

    #[test]
    fn shift_penalty_examples() {
        let h = household(vec![appliance("a", 2.0, 2, (0, 20), false, &[4, 5])], 24, 10.0);
        let base = h.baseline_schedule();
        let same = shift_penalty(&base, &base, &h, 0.05).unwrap();
        assert_eq!(same.penalty_cost, 0.0);
        assert_eq!(same.shift_slots, vec![0]);

        let moved = Schedule::from_on_slots(24, [&[7usize, 8][..]]);
        let p = shift_penalty(&moved, &base, &h, 0.05).unwrap();
        assert_eq!(p.shift_slots, vec![6]);
        assert!((p.penalty_cost - 0.30).abs() < 1e-12);

        let hi = household(vec![appliance("i", 1.0, 2, (0, 20), true, &[10, 11])], 24, 10.0);
        let moved = Schedule::from_on_slots(24, [&[9usize, 12][..]]);
        let p = shift_penalty(&moved, &hi.baseline_schedule(), &hi, 0.10).unwrap();
        assert_eq!(p.shift_slots, vec![2]);
        assert!((p.penalty_cost - 0.10).abs() < 1e-12);

        let short = Schedule::from_on_slots(24, [&[9usize][..]]);
        assert!(matches!(
            shift_penalty(&short, &hi.baseline_schedule(), &hi, 0.1),
            Err(SchedulerError::DurationViolation { .. })
        ));
    }

    #[test]
    fn feasibility_violations() {
        // Table I household 1 carries a 12.4 kW cap.
        let mut h = household(
            vec![
                appliance("a", 6.0, 1, (0, 47), true, &[10]),
                appliance("b", 6.5, 1, (0, 47), true, &[20]),
            ],
            48,
            12.4,
        );
        assert!(is_feasible(&h.baseline_schedule(), &h).unwrap().is_feasible());
        let stacked = Schedule::from_on_slots(48, [&[10usize][..], &[10][..]]);
        let report = is_feasible(&stacked, &h).unwrap();
        assert!(matches!(report.violations[0], Violation::MaxDemand { slot: 10, .. }));

        h.appliances[0].window_start = 10;
        h.appliances[0].window_end = 20;
        let early = Schedule::from_on_slots(48, [&[9usize][..], &[20][..]]);
        let report = is_feasible(&early, &h).unwrap();
        assert_eq!(report.violations, vec![Violation::Window { appliance: 0, slot: 9 }]);

        let u = household(vec![appliance("u", 1.0, 2, (0, 10), false, &[1, 2])], 12, 5.0);
        let gap = Schedule::from_on_slots(12, [&[1usize, 3][..]]);
        assert_eq!(
            is_feasible(&gap, &u).unwrap().violations,
            vec![Violation::Contiguity { appliance: 0 }]
        );
    }

    #[test]
    fn total_cost_examples() {
        let mut price = vec![0.0; 4];
        price[2] = 0.2;
        let price = PriceProfile::new(price).unwrap();
        let pv = PvProfile::zeros(4, 6.0);
        let h = household(vec![appliance("a", 1.0, 1, (0, 3), true, &[2])], 4, 2.0);
        let c = total_cost(&h.baseline_schedule(), &h, &price, &pv, 0.5).unwrap();
        assert_eq!(c.penalty_cost, 0.0);
        assert!((c.objective() - 0.10).abs() < 1e-12);

        let moved = Schedule::from_on_slots(4, [&[0usize][..]]);
        let c = total_cost(&moved, &h, &price, &pv, 0.0).unwrap();
        assert_eq!(c.objective(), c.electricity_cost);
        assert_eq!(c.shift_slots, vec![2]);

        let bad = Schedule::from_on_slots(4, [&[0usize, 1][..]]);
        assert!(matches!(
            total_cost(&bad, &h, &price, &pv, 0.0),
            Err(SchedulerError::InfeasibleSchedule(_))
        ));
    }
}
