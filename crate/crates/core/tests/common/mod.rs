//! Test-only oracles. Nothing here calls into the solver paths it checks.
#![allow(dead_code)]

pub mod newton;

use dsmsim::feeder::{build_feeder, BranchSpec, Feeder, FeederSpec, InjectionFrame, PowerFlowResult};
use dsmsim::model::{Appliance, Household, PriceProfile, PvProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SmallInstance {
    pub household: Household,
    pub price: PriceProfile,
    pub pv: PvProfile,
    pub penalty_price: f64,
}

/// All legal on-slot sets of one appliance (window and contiguity only).
pub fn placements(a: &Appliance) -> Vec<Vec<usize>> {
    let window: Vec<usize> = (a.window_start..=a.window_end).collect();
    if !a.interruptible {
        return (a.window_start..=a.window_end + 1 - a.duration_slots)
            .map(|s| (s..s + a.duration_slots).collect())
            .collect();
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(window: &[usize], d: usize, from: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == d {
            out.push(current.clone());
            return;
        }
        for i in from..window.len() {
            current.push(window[i]);
            rec(window, d, i + 1, current, out);
            current.pop();
        }
    }
    rec(&window, a.duration_slots, 0, &mut current, &mut out);
    out
}

/// Objective written out directly from the cost definitions.
pub fn objective(inst: &SmallInstance, choice: &[&Vec<usize>]) -> Option<f64> {
    let h = &inst.household;
    let t_len = h.base_load_kw.len();
    let mut gross = h.base_load_kw.clone();
    for (a, slots) in h.appliances.iter().zip(choice) {
        for &t in slots.iter() {
            gross[t] += a.rated_power_kw;
        }
    }
    if gross.iter().any(|g| *g > h.md_kw + 1e-9) {
        return None;
    }
    let mut energy = 0.0;
    for t in 0..t_len {
        let pv = if h.pv_installed { inst.pv.output_kw[t] } else { 0.0 };
        energy += 0.5 * f64::max(gross[t] - pv, 0.0) * inst.price.price_per_kwh[t];
    }
    let mut penalty = 0.0;
    for (a, slots) in h.appliances.iter().zip(choice) {
        let shift: usize = slots
            .iter()
            .zip(&a.baseline_on_slots)
            .map(|(n, o)| n.abs_diff(*o))
            .sum();
        penalty += 0.5 * inst.penalty_price * shift as f64 * a.rated_power_kw;
    }
    Some(energy + penalty)
}

/// Minimum objective by exhaustive enumeration; `None` when infeasible.
pub fn enumerate_min(inst: &SmallInstance) -> Option<f64> {
    let options: Vec<Vec<Vec<usize>>> = inst.household.appliances.iter().map(placements).collect();
    let mut best: Option<f64> = None;
    let mut idx = vec![0usize; options.len()];
    loop {
        let choice: Vec<&Vec<usize>> = idx.iter().zip(&options).map(|(&i, o)| &o[i]).collect();
        if let Some(v) = objective(inst, &choice) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return best;
            }
            idx[k] += 1;
            if idx[k] < options[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn enumeration_size(h: &Household) -> usize {
    h.appliances.iter().map(|a| placements(a).len()).product()
}

fn random_appliance(rng: &mut ChaCha8Rng, id: usize, horizon: usize) -> Appliance {
    let duration = rng.gen_range(1..=3usize.min(horizon));
    let len = rng.gen_range(duration..=horizon);
    let start = rng.gen_range(0..=horizon - len);
    let end = start + len - 1;
    let interruptible = rng.gen_bool(0.5);
    let baseline: Vec<usize> = if interruptible {
        let mut pool: Vec<usize> = (start..=end).collect();
        let mut picked = Vec::new();
        for _ in 0..duration {
            let i = rng.gen_range(0..pool.len());
            picked.push(pool.remove(i));
        }
        picked.sort_unstable();
        picked
    } else {
        let s = rng.gen_range(start..=end + 1 - duration);
        (s..s + duration).collect()
    };
    Appliance {
        id: format!("app{id}"),
        rated_power_kw: (rng.gen_range(0.5..4.0f64) * 10.0).round() / 10.0,
        duration_slots: duration,
        window_start: start,
        window_end: end,
        interruptible,
        baseline_on_slots: baseline,
    }
}

/// Random instance with at most three appliances on a short horizon.
pub fn small_instance(seed: u64, max_horizon: usize) -> SmallInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let horizon = rng.gen_range(4..=max_horizon);
        let count = rng.gen_range(1..=3);
        let appliances: Vec<Appliance> = (0..count).map(|i| random_appliance(&mut rng, i, horizon)).collect();
        let base: Vec<f64> = (0..horizon).map(|_| rng.gen_range(0.0..1.5)).collect();
        let mut household = Household {
            index: 1,
            bus: 2,
            appliances,
            md_kw: 100.0,
            pv_installed: rng.gen_bool(0.5),
            base_load_kw: base,
            power_factor: 0.95,
        };
        let baseline_peak = {
            let mut g = household.base_load_kw.clone();
            for a in &household.appliances {
                for &t in &a.baseline_on_slots {
                    g[t] += a.rated_power_kw;
                }
            }
            g.into_iter().fold(0.0, f64::max)
        };
        household.md_kw = baseline_peak + rng.gen_range(0.0..2.0);
        if enumeration_size(&household) > 100_000 {
            continue;
        }
        let price = PriceProfile::new((0..horizon).map(|_| rng.gen_range(0.02..0.40)).collect()).unwrap();
        let pv = PvProfile::new((0..horizon).map(|_| rng.gen_range(0.0..6.0)).collect(), 6.0).unwrap();
        let penalty_price = [0.0, 0.05, 0.10, rng.gen_range(0.0..0.3)][rng.gen_range(0..4)];
        return SmallInstance {
            household,
            price,
            pv,
            penalty_price,
        };
    }
}

pub struct RandomCase {
    pub feeder: Feeder,
    pub frame: InjectionFrame,
}

/// Random radial tree: bus i hangs off a uniformly chosen earlier bus.
pub fn random_case(seed: u64) -> RandomCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=31);
    let branches = (2..=n)
        .map(|bus| BranchSpec {
            from_bus: rng.gen_range(1..bus),
            to_bus: bus,
            resistance_pu: rng.gen_range(0.001..0.02),
            reactance_pu: rng.gen_range(0.001..0.02),
        })
        .collect();
    let feeder = build_feeder(FeederSpec {
        bus_count: n,
        branches,
        base_kv: 12.47,
        base_kva: 1000.0,
        slack_voltage_pu: rng.gen_range(0.98..1.05),
    })
    .unwrap();
    let mut frame = InjectionFrame::zeros(n);
    for bus in 1..n {
        frame.load_kw[bus] = rng.gen_range(-6.0..12.0);
        frame.load_kvar[bus] = rng.gen_range(-1.0..4.0);
    }
    RandomCase { feeder, frame }
}

pub fn oracle(feeder: &Feeder, frame: &InjectionFrame) -> newton::NewtonResult {
    let base = feeder.base_kva();
    let branches: Vec<_> = (0..feeder.branch_count())
        .map(|b| {
            let (u, d) = feeder.branch_ends(b);
            let (r, x) = feeder.branch_impedance(b);
            (u, d, r, x)
        })
        .collect();
    let p: Vec<f64> = frame.load_kw.iter().map(|v| v / base).collect();
    let q: Vec<f64> = frame.load_kvar.iter().map(|v| v / base).collect();
    newton::solve(feeder.bus_count(), &branches, &p, &q, feeder.slack_voltage())
}

/// Slack injection minus (net demand + losses), in pu.
pub fn balance_residual(feeder: &Feeder, frame: &InjectionFrame, r: &PowerFlowResult) -> f64 {
    (r.slack_p_kw - frame.total_kw() - r.total_loss_kw).abs() / feeder.base_kva()
}
