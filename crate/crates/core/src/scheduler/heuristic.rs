use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::workspace::{Score, Workspace};
use super::{total_cost, Problem, SchedulerError, Solution, SolveBudget, SolveStatus};

/// Greedy construction followed by first-improvement local search.
///
/// Construction places appliances one by one, each at its cheapest slots
/// given the load already placed (price after PV credit, plus penalty).
/// Local search re-places single appliances and jointly re-places pairs
/// until neither move improves the objective. Starts: the baseline, greedy
/// in descending `rated × duration` order, and `budget.restarts` greedy
/// runs over seeded random orders. The best result is kept, so the
/// objective never exceeds the baseline's when the baseline is feasible.
pub fn optimize_heuristic(problem: &Problem<'_>, budget: &SolveBudget, seed: u64) -> Result<Solution, SchedulerError> {
    problem.check_dimensions()?;
    let placements =
        local_search_best(problem, budget.restarts, seed).ok_or(SchedulerError::NoFeasibleSchedule)?;
    let ws = Workspace::new(problem);
    let schedule = ws.to_schedule(&placements);
    let costs = total_cost(&schedule, problem.household, problem.price, problem.pv, problem.penalty_price)?;
    Ok(Solution {
        schedule,
        costs,
        status: SolveStatus::Heuristic,
        nodes: 0,
    })
}

pub(crate) fn local_search_best(problem: &Problem<'_>, restarts: u32, seed: u64) -> Option<Vec<Vec<usize>>> {
    let mut ws = Workspace::new(problem);
    let n = ws.devices.len();
    let natural: Vec<usize> = (0..n).collect();
    let mut order = natural.clone();
    order.sort_by(|&a, &b| {
        let ka = ws.devices[a].rated * ws.devices[a].duration as f64;
        let kb = ws.devices[b].rated * ws.devices[b].duration as f64;
        kb.total_cmp(&ka).then(a.cmp(&b))
    });

    let mut starts: Vec<Vec<Vec<usize>>> = Vec::new();
    let baseline: Vec<Vec<usize>> = ws.devices.iter().map(|d| d.baseline.clone()).collect();
    if ws.replay(&natural, &baseline).is_some() {
        starts.push(baseline);
    }
    if let Some(g) = greedy(&mut ws, &order) {
        starts.push(g);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..restarts {
        let mut shuffled = order.clone();
        shuffled.shuffle(&mut rng);
        if let Some(g) = greedy(&mut ws, &shuffled) {
            starts.push(g);
        }
    }

    let mut best: Option<(Score, Vec<Vec<usize>>)> = None;
    for mut placements in starts {
        improve(&mut ws, &mut placements);
        let score = ws.replay(&natural, &placements)?;
        if best.as_ref().is_none_or(|(b, _)| score.better_than(*b)) {
            best = Some((score, placements));
        }
    }
    best.map(|(_, p)| p)
}

/// Places appliances in `order`, each at its best slots. Leaves `ws` empty.
fn greedy(ws: &mut Workspace<'_>, order: &[usize]) -> Option<Vec<Vec<usize>>> {
    let mut placements = vec![Vec::new(); ws.devices.len()];
    let mut done = 0;
    for &a in order {
        let Some((_, slots)) = ws.best(a) else { break };
        ws.place(a, &slots);
        placements[a] = slots;
        done += 1;
    }
    for &a in order[..done].iter().rev() {
        ws.remove(a, &placements[a]);
    }
    (done == order.len()).then_some(placements)
}

/// Local search from a feasible start. `ws` is empty on entry and exit.
fn improve(ws: &mut Workspace<'_>, placements: &mut [Vec<usize>]) {
    let n = placements.len();
    for (a, slots) in placements.iter().enumerate() {
        ws.place(a, slots);
    }
    loop {
        let mut improved = false;
        for a in 0..n {
            improved |= move_single(ws, placements, a);
        }
        if improved {
            continue;
        }
        for a in 0..n {
            for b in a + 1..n {
                improved |= move_pair(ws, placements, a, b);
            }
        }
        if !improved {
            break;
        }
    }
    for (a, slots) in placements.iter().enumerate() {
        ws.remove(a, slots);
    }
}

fn move_single(ws: &mut Workspace<'_>, placements: &mut [Vec<usize>], a: usize) -> bool {
    ws.remove(a, &placements[a]);
    let current = ws.score_of(a, &placements[a]);
    let improved = match ws.best(a) {
        Some((score, slots)) if score.better_than(current) => {
            placements[a] = slots;
            true
        }
        _ => false,
    };
    ws.place(a, &placements[a]);
    improved
}

fn move_pair(ws: &mut Workspace<'_>, placements: &mut [Vec<usize>], a: usize, b: usize) -> bool {
    ws.remove(a, &placements[a]);
    ws.remove(b, &placements[b]);
    let first = ws.score_of(a, &placements[a]);
    ws.place(a, &placements[a]);
    let current = first + ws.score_of(b, &placements[b]);
    ws.remove(a, &placements[a]);

    let mut best: Option<(Score, Vec<usize>, Vec<usize>)> = None;
    for (x, y) in [(a, b), (b, a)] {
        let Some((sx, px)) = ws.best(x) else { continue };
        ws.place(x, &px);
        let second = ws.best(y);
        ws.remove(x, &px);
        let Some((sy, py)) = second else { continue };
        let total = sx + sy;
        if best.as_ref().is_none_or(|(s, _, _)| total.better_than(*s)) {
            let (pa, pb) = if x == a { (px, py) } else { (py, px) };
            best = Some((total, pa, pb));
        }
    }
    let improved = match best {
        Some((total, pa, pb)) if total.better_than(current) => {
            placements[a] = pa;
            placements[b] = pb;
            true
        }
        _ => false,
    };
    ws.place(a, &placements[a]);
    ws.place(b, &placements[b]);
    improved
}
