//! Full-AC Newton-Raphson in polar form over a dense bus admittance matrix.
//! Bus 0 is the slack; every other bus is PQ with the given load.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub struct NewtonResult {
    pub v_mag: Vec<f64>,
    pub v_ang: Vec<f64>,
    pub iterations: usize,
}

/// `branches`: (from, to, r_pu, x_pu), 0-based. `load_p`/`load_q`: demand
/// in pu at each bus (entry 0 ignored).
pub fn solve(
    bus_count: usize,
    branches: &[(usize, usize, f64, f64)],
    load_p: &[f64],
    load_q: &[f64],
    slack: f64,
) -> NewtonResult {
    let n = bus_count;
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for &(f, t, r, x) in branches {
        let yb = Complex64::new(1.0, 0.0) / Complex64::new(r, x);
        y[f][f] += yb;
        y[t][t] += yb;
        y[f][t] -= yb;
        y[t][f] -= yb;
    }
    let g = |i: usize, k: usize| y[i][k].re;
    let b = |i: usize, k: usize| y[i][k].im;

    let mut vm = vec![1.0f64; n];
    let mut va = vec![0.0f64; n];
    vm[0] = slack;
    let m = n - 1;
    let mut iterations = 0;
    for _ in 0..50 {
        iterations += 1;
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        for i in 0..n {
            for k in 0..n {
                let th = va[i] - va[k];
                p[i] += vm[i] * vm[k] * (g(i, k) * th.cos() + b(i, k) * th.sin());
                q[i] += vm[i] * vm[k] * (g(i, k) * th.sin() - b(i, k) * th.cos());
            }
        }
        let mut mismatch = DVector::zeros(2 * m);
        for i in 1..n {
            mismatch[i - 1] = -load_p[i] - p[i];
            mismatch[m + i - 1] = -load_q[i] - q[i];
        }
        if mismatch.amax() < 1e-13 {
            break;
        }
        let mut jac = DMatrix::zeros(2 * m, 2 * m);
        for i in 1..n {
            for k in 1..n {
                let (r, c) = (i - 1, k - 1);
                if i == k {
                    jac[(r, c)] = -q[i] - b(i, i) * vm[i] * vm[i];
                    jac[(r, m + c)] = p[i] / vm[i] + g(i, i) * vm[i];
                    jac[(m + r, c)] = p[i] - g(i, i) * vm[i] * vm[i];
                    jac[(m + r, m + c)] = q[i] / vm[i] - b(i, i) * vm[i];
                } else {
                    let th = va[i] - va[k];
                    let (s, co) = th.sin_cos();
                    jac[(r, c)] = vm[i] * vm[k] * (g(i, k) * s - b(i, k) * co);
                    jac[(r, m + c)] = vm[i] * (g(i, k) * co + b(i, k) * s);
                    jac[(m + r, c)] = -vm[i] * vm[k] * (g(i, k) * co + b(i, k) * s);
                    jac[(m + r, m + c)] = vm[i] * (g(i, k) * s - b(i, k) * co);
                }
            }
        }
        let dx = jac.lu().solve(&mismatch).expect("non-singular Jacobian");
        for i in 1..n {
            va[i] += dx[i - 1];
            vm[i] += dx[m + i - 1];
        }
    }
    NewtonResult {
        v_mag: vm,
        v_ang: va,
        iterations,
    }
}
