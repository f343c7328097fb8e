use std::time::{Duration, Instant};

use super::heuristic::local_search_best;
use super::workspace::{Score, Tables, Workspace};
use super::{total_cost, Problem, SchedulerError, Solution, SolveBudget, SolveStatus};

/// Depth-first branch and bound over appliance placements.
///
/// Appliances are fixed one at a time in descending `rated × duration`. An
/// interruptible appliance is fixed one on-slot at a time, guided by an
/// exact cost-to-go table for that appliance. The bound for the remaining
/// appliances sums each one's best isolated placement against the current
/// load, which lets every one of them use the whole remaining PV surplus.
/// Sharing surplus can only raise cost, so the bound is valid.
///
/// The search is seeded with the heuristic result and the baseline. When
/// it completes, the incumbent is globally minimal in objective, then in
/// total shift.
pub fn optimize_exact(problem: &Problem<'_>, budget: &SolveBudget) -> Result<Solution, SchedulerError> {
    problem.check_dimensions()?;
    let h = problem.household;
    let mut ws = Workspace::new(problem);

    let mut order: Vec<usize> = (0..ws.devices.len()).collect();
    order.sort_by(|&a, &b| {
        let ka = ws.devices[a].rated * ws.devices[a].duration as f64;
        let kb = ws.devices[b].rated * ws.devices[b].duration as f64;
        kb.total_cmp(&ka).then(a.cmp(&b))
    });

    let mut incumbent: Option<(Score, Vec<Vec<usize>>)> = None;
    let mut seeds: Vec<Vec<Vec<usize>>> = Vec::new();
    if let Some(start) = local_search_best(problem, budget.restarts, 0) {
        seeds.push(start);
    }
    seeds.push(h.appliances.iter().map(|a| a.baseline_on_slots.clone()).collect());
    for seed in seeds {
        if let Some(score) = ws.replay(&order, &seed) {
            if incumbent.as_ref().is_none_or(|(best, _)| score.better_than(*best)) {
                incumbent = Some((score, seed));
            }
        }
    }

    let mut search = Search {
        order,
        placed: vec![Vec::new(); ws.devices.len()],
        incumbent,
        nodes: 0,
        max_nodes: budget.max_nodes,
        deadline: Instant::now() + Duration::from_secs_f64(budget.time_limit_s.max(0.0)),
        exhausted: false,
    };
    search.descend(&mut ws, 0, Score::ZERO);

    let Some((_, placements)) = search.incumbent else {
        return Err(if search.exhausted {
            SchedulerError::BudgetExhausted
        } else {
            SchedulerError::NoFeasibleSchedule
        });
    };
    let schedule = ws.to_schedule(&placements);
    let costs = total_cost(&schedule, h, problem.price, problem.pv, problem.penalty_price)?;
    Ok(Solution {
        schedule,
        costs,
        status: if search.exhausted {
            SolveStatus::BudgetExhausted
        } else {
            SolveStatus::Optimal
        },
        nodes: search.nodes,
    })
}

struct Search {
    order: Vec<usize>,
    placed: Vec<Vec<usize>>,
    incumbent: Option<(Score, Vec<Vec<usize>>)>,
    nodes: u64,
    max_nodes: u64,
    deadline: Instant,
    exhausted: bool,
}

impl Search {
    fn admits(&self, bound: Score) -> bool {
        self.incumbent
            .as_ref()
            .is_none_or(|(best, _)| bound.better_than(*best))
    }

    fn tick(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes || (self.nodes.is_multiple_of(4096) && Instant::now() > self.deadline) {
            self.exhausted = true;
            return false;
        }
        true
    }

    fn descend(&mut self, ws: &mut Workspace<'_>, depth: usize, acc: Score) {
        if depth == self.order.len() {
            if self.admits(acc) {
                self.incumbent = Some((acc, self.placed.clone()));
            }
            return;
        }
        if !self.tick() {
            return;
        }
        let mut rest = Score::ZERO;
        for &b in &self.order[depth + 1..] {
            match ws.best_score(b) {
                Some(s) => rest = rest + s,
                None => return,
            }
        }
        let a = self.order[depth];
        if ws.devices[a].interruptible {
            let Some(tables) = ws.tables(a) else { return };
            let mut chosen = Vec::with_capacity(ws.devices[a].duration);
            self.pick(ws, &tables, depth, a, 0, None, Score::ZERO, &mut chosen, acc, rest);
        } else {
            let duration = ws.devices[a].duration;
            for (score, start) in ws.blocks(a) {
                if self.exhausted || !self.admits(acc + score + rest) {
                    break;
                }
                let slots: Vec<usize> = (start..start + duration).collect();
                self.fix(ws, depth, a, slots, acc + score);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn pick(
        &mut self,
        ws: &mut Workspace<'_>,
        tables: &Tables,
        depth: usize,
        a: usize,
        k: usize,
        after: Option<usize>,
        partial: Score,
        chosen: &mut Vec<usize>,
        acc: Score,
        rest: Score,
    ) {
        if k == ws.devices[a].duration {
            self.fix(ws, depth, a, chosen.clone(), acc + partial);
            return;
        }
        if k > 0 && !self.tick() {
            return;
        }
        for (value, j) in tables.ranked(k, after) {
            if self.exhausted || !self.admits(acc + partial + value + rest) {
                break;
            }
            chosen.push(tables.slots[j]);
            let step = tables.step[k][j];
            self.pick(ws, tables, depth, a, k + 1, Some(j), partial + step, chosen, acc, rest);
            chosen.pop();
        }
    }

    fn fix(&mut self, ws: &mut Workspace<'_>, depth: usize, a: usize, slots: Vec<usize>, acc: Score) {
        ws.place(a, &slots);
        self.placed[a] = slots;
        self.descend(ws, depth + 1, acc);
        let slots = std::mem::take(&mut self.placed[a]);
        ws.remove(a, &slots);
    }
}
