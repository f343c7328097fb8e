use serde::{Deserialize, Serialize};

use super::{optimize_exact, optimize_heuristic, total_cost, Problem, SchedulerError, SolveBudget, Solution};
use crate::model::{Household, PriceProfile, PvProfile};

const OBJECTIVE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub kind: SolverKind,
    pub seed: u64,
    pub max_nodes: u64,
    pub time_limit_s: f64,
    pub restarts: u32,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let budget = SolveBudget::default();
        Self {
            kind: SolverKind::Heuristic,
            seed: 7,
            max_nodes: budget.max_nodes,
            time_limit_s: budget.time_limit_s,
            restarts: budget.restarts,
        }
    }
}

impl SolverSettings {
    pub fn budget(&self) -> SolveBudget {
        SolveBudget {
            max_nodes: self.max_nodes,
            time_limit_s: self.time_limit_s,
            restarts: self.restarts,
        }
    }
}

/// Runs the configured solver on one problem.
pub fn solve(problem: &Problem<'_>, settings: &SolverSettings) -> Result<Solution, SchedulerError> {
    match settings.kind {
        SolverKind::Exact => optimize_exact(problem, &settings.budget()),
        SolverKind::Heuristic => optimize_heuristic(problem, &settings.budget(), settings.seed),
    }
}

fn better(a: &Solution, b: &Solution) -> bool {
    let (x, y) = (a.costs.objective(), b.costs.objective());
    x < y - OBJECTIVE_EPS || (x <= y + OBJECTIVE_EPS && a.costs.total_shift_slots() < b.costs.total_shift_slots())
}

/// Solves one household at several penalty prices, returned in input order.
///
/// Prices are visited from highest to lowest and every schedule found at a
/// higher price is re-scored as a candidate at each lower one. A schedule
/// never costs more at a lower penalty, so the reported objectives are
/// non-decreasing in the penalty price even when the solver is not exact.
pub fn solve_penalty_ladder(
    household: &Household,
    price: &PriceProfile,
    pv: &PvProfile,
    penalties: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<Solution>, SchedulerError> {
    let mut order: Vec<usize> = (0..penalties.len()).collect();
    order.sort_by(|&a, &b| penalties[b].total_cmp(&penalties[a]));
    let mut found: Vec<Option<Solution>> = vec![None; penalties.len()];
    let mut history: Vec<usize> = Vec::new();
    for &k in &order {
        let problem = Problem::new(household, price, pv, penalties[k]);
        let mut best = solve(&problem, settings)?;
        for &j in &history {
            let schedule = &found[j].as_ref().expect("solved earlier").schedule;
            let candidate = Solution {
                schedule: schedule.clone(),
                costs: total_cost(schedule, household, price, pv, penalties[k])?,
                status: best.status,
                nodes: 0,
            };
            if better(&candidate, &best) {
                best = Solution {
                    nodes: best.nodes,
                    ..candidate
                };
            }
        }
        found[k] = Some(best);
        history.push(k);
    }
    Ok(found.into_iter().map(|s| s.expect("every price solved")).collect())
}
