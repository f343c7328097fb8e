use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Feeder, FeederError};

/// Convergence threshold on the largest per-iteration voltage change, pu.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100;
const COLLAPSE_PU: f64 = 0.5;

/// Demand at every bus for one slot, indexed by internal bus number.
/// Negative real power is export (PV surplus). The slack entry must be zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectionFrame {
    pub load_kw: Vec<f64>,
    pub load_kvar: Vec<f64>,
}

impl InjectionFrame {
    pub fn zeros(bus_count: usize) -> Self {
        Self {
            load_kw: vec![0.0; bus_count],
            load_kvar: vec![0.0; bus_count],
        }
    }

    pub fn total_kw(&self) -> f64 {
        self.load_kw.iter().sum()
    }

    pub fn total_kvar(&self) -> f64 {
        self.load_kvar.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowResult {
    pub v_mag: Vec<f64>,
    pub v_ang: Vec<f64>,
    /// Sending-end (upstream) real flow per branch, downstream positive.
    pub branch_p_kw: Vec<f64>,
    pub branch_q_kvar: Vec<f64>,
    pub total_loss_kw: f64,
    /// Power drawn from the substation.
    pub slack_p_kw: f64,
    pub slack_q_kvar: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn branch_currents(feeder: &Feeder, demand: &[Complex64], v: &[Complex64], current: &mut [Complex64]) {
    let mut through = vec![Complex64::new(0.0, 0.0); v.len()];
    for &bus in feeder.bfs_order().iter().rev() {
        let Some(branch) = feeder.feeding_branch(bus) else { continue };
        through[bus] += (demand[bus] / v[bus]).conj();
        current[branch] = through[bus];
        let (up, _) = feeder.branch_ends(branch);
        let carried = through[bus];
        through[up] += carried;
    }
}

/// Backward/forward sweep.
///
/// Each iteration draws constant-power load currents at the present
/// voltages, accumulates branch currents from the leaves toward the slack,
/// then updates voltages outward from the slack. Stops when the largest
/// voltage change falls below `tol`. A non-converged run is returned with
/// `converged = false`; magnitudes under 0.5 pu abort with
/// [`FeederError::VoltageCollapse`].
pub fn solve_power_flow(
    feeder: &Feeder,
    frame: &InjectionFrame,
    tol: f64,
    max_iter: usize,
) -> Result<PowerFlowResult, FeederError> {
    let n = feeder.bus_count();
    for found in [frame.load_kw.len(), frame.load_kvar.len()] {
        if found != n {
            return Err(FeederError::DimensionMismatch { expected: n, found });
        }
    }
    if frame.load_kw[0] != 0.0 || frame.load_kvar[0] != 0.0 {
        return Err(FeederError::BadSpec("the slack bus cannot carry a specified load".into()));
    }
    let base = feeder.base_kva();
    let demand: Vec<Complex64> = frame
        .load_kw
        .iter()
        .zip(&frame.load_kvar)
        .map(|(p, q)| Complex64::new(p / base, q / base))
        .collect();
    let impedance: Vec<Complex64> = (0..feeder.branch_count())
        .map(|b| {
            let (r, x) = feeder.branch_impedance(b);
            Complex64::new(r, x)
        })
        .collect();

    let mut v = vec![Complex64::new(feeder.slack_voltage(), 0.0); n];
    let mut current = vec![Complex64::new(0.0, 0.0); feeder.branch_count()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        branch_currents(feeder, &demand, &v, &mut current);
        let mut largest_change: f64 = 0.0;
        for &bus in &feeder.bfs_order()[1..] {
            let branch = feeder.feeding_branch(bus).expect("non-slack bus has a feeding branch");
            let (up, _) = feeder.branch_ends(branch);
            let updated = v[up] - impedance[branch] * current[branch];
            largest_change = largest_change.max((updated - v[bus]).norm());
            v[bus] = updated;
        }
        if let Some((bus, vb)) = v.iter().enumerate().find(|(_, vb)| vb.norm() < COLLAPSE_PU) {
            return Err(FeederError::VoltageCollapse {
                bus,
                magnitude: vb.norm(),
            });
        }
        if largest_change < tol {
            converged = true;
            break;
        }
    }

    // Report currents consistent with the final voltages.
    branch_currents(feeder, &demand, &v, &mut current);
    let mut branch_p_kw = Vec::with_capacity(current.len());
    let mut branch_q_kvar = Vec::with_capacity(current.len());
    let mut loss = 0.0;
    for (b, i) in current.iter().enumerate() {
        let (up, _) = feeder.branch_ends(b);
        let sending = v[up] * i.conj() * base;
        branch_p_kw.push(sending.re);
        branch_q_kvar.push(sending.im);
        loss += i.norm_sqr() * impedance[b].re * base;
    }
    let heads = feeder.head_branches();
    Ok(PowerFlowResult {
        v_mag: v.iter().map(|x| x.norm()).collect(),
        v_ang: v.iter().map(|x| x.arg()).collect(),
        slack_p_kw: heads.iter().map(|&b| branch_p_kw[b]).sum(),
        slack_q_kvar: heads.iter().map(|&b| branch_q_kvar[b]).sum(),
        branch_p_kw,
        branch_q_kvar,
        total_loss_kw: loss,
        converged,
        iterations,
    })
}

/// Independent per-slot solves, run in parallel. Errors carry the slot.
pub fn solve_time_series(
    feeder: &Feeder,
    frames: &[InjectionFrame],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<PowerFlowResult>, FeederError> {
    frames
        .par_iter()
        .enumerate()
        .map(|(slot, frame)| {
            solve_power_flow(feeder, frame, tol, max_iter).map_err(|e| FeederError::AtSlot {
                slot,
                source: Box::new(e),
            })
        })
        .collect()
}
