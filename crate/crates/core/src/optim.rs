//! Derivative-free minimization with linear models on a trust-region simplex.
//!
//! The method keeps `n + 1` points, fits the linear interpolant through them,
//! and steps a distance `ρ` down its gradient from the best point. Poor
//! agreement between predicted and actual decrease halves `ρ`; a point that
//! has drifted more than `2ρ` away is replaced by a geometry-restoring one.
//! Only objective values are used.

use alloc::vec::Vec;

use num_traits::Float;

/// Optimizer settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeOptions {
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Cap on iterations. An iteration is one trust-region or geometry step
    /// and normally costs one evaluation; the initial simplex is not counted.
    pub max_iterations: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { rho_begin: 0.5, rho_end: 1e-4, max_iterations: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub evaluations: usize,
    /// Objective value at the point evaluated in this iteration.
    pub value: f64,
    /// Best objective value seen so far.
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for j in 0..n {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

fn norm(v: &[f64]) -> f64 {
    Float::sqrt(v.iter().map(|x| x * x).sum::<f64>())
}

/// Minimizes `f` from `x0`. With `max_iterations = 0`, returns `x0` and its value.
pub fn minimize(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: &MinimizeOptions) -> MinimizeResult {
    let n = x0.len();
    let f0 = f(x0);
    let mut evaluations = 1;
    let mut best = (x0.to_vec(), f0);
    let mut trace = Vec::new();
    if opts.max_iterations == 0 || n == 0 {
        return MinimizeResult { x: best.0, value: best.1, iterations: 0, evaluations, trace };
    }

    let mut rho = opts.rho_begin;
    let mut pts: Vec<Vec<f64>> = alloc::vec![x0.to_vec()];
    let mut vals = alloc::vec![f0];
    let mut eval = |x: &[f64], best: &mut (Vec<f64>, f64), evaluations: &mut usize| {
        let v = f(x);
        *evaluations += 1;
        if v < best.1 {
            *best = (x.to_vec(), v);
        }
        v
    };
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += rho;
        vals.push(eval(&x, &mut best, &mut evaluations));
        pts.push(x);
    }

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let b = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
        let others: Vec<usize> = (0..=n).filter(|&i| i != b).collect();
        let edges: Vec<Vec<f64>> = others.iter().map(|&i| (0..n).map(|k| pts[i][k] - pts[b][k]).collect()).collect();
        let Some(dinv) = invert(edges.clone()) else {
            // degenerate simplex: rebuild around the best point
            let base = pts[b].clone();
            let fb = vals[b];
            pts = alloc::vec![base.clone()];
            vals = alloc::vec![fb];
            for i in 0..n {
                let mut x = base.clone();
                x[i] += rho;
                vals.push(eval(&x, &mut best, &mut evaluations));
                pts.push(x);
            }
            iterations += 1;
            let value = vals[1..].iter().cloned().fold(f64::INFINITY, f64::min);
            trace.push(TracePoint { iteration: iterations, evaluations, value, best: best.1 });
            continue;
        };
        let column = |r: usize| -> Vec<f64> { (0..n).map(|k| dinv[k][r]).collect() };

        let (far, far_dist) = edges
            .iter()
            .enumerate()
            .map(|(r, e)| (r, norm(e)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((0, 0.0));
        if far_dist > 2.0 * rho {
            let w = column(far);
            let wn = norm(&w);
            let x: Vec<f64> = (0..n).map(|k| pts[b][k] + rho * w[k] / wn).collect();
            let v = eval(&x, &mut best, &mut evaluations);
            pts[others[far]] = x;
            vals[others[far]] = v;
            iterations += 1;
            trace.push(TracePoint { iteration: iterations, evaluations, value: v, best: best.1 });
            continue;
        }

        let df: Vec<f64> = others.iter().map(|&i| vals[i] - vals[b]).collect();
        let g: Vec<f64> = (0..n).map(|k| (0..n).map(|r| dinv[k][r] * df[r]).sum()).collect();
        let gn = norm(&g);
        if gn < 1e-14 {
            rho *= 0.5;
            if rho < opts.rho_end {
                break;
            }
            continue;
        }
        let s: Vec<f64> = g.iter().map(|gk| -rho * gk / gn).collect();
        let x: Vec<f64> = (0..n).map(|k| pts[b][k] + s[k]).collect();
        let v = eval(&x, &mut best, &mut evaluations);
        iterations += 1;
        trace.push(TracePoint { iteration: iterations, evaluations, value: v, best: best.1 });

        let predicted = rho * gn;
        let ratio = (vals[b] - v) / predicted;
        // replace the vertex whose removal keeps the simplex best conditioned
        let coeff = |r: usize| column(r).iter().zip(&s).map(|(w, sk)| w * sk).sum::<f64>().abs();
        let j = (0..n).max_by(|&r, &t| coeff(r).total_cmp(&coeff(t))).unwrap_or(0);
        if v < vals[others[j]] {
            pts[others[j]] = x;
            vals[others[j]] = v;
        }
        if ratio < 0.1 {
            rho *= 0.5;
            if rho < opts.rho_end {
                break;
            }
        }
    }
    MinimizeResult { x: best.0, value: best.1, iterations, evaluations, trace }
}
