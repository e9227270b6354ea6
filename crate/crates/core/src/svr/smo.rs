//! Sequential minimal optimization for the ε-SVR dual
//!
//! min ½(α − α*)ᵀK(α − α*) + εeᵀ(α + α*) − yᵀ(α − α*)
//! s.t. eᵀ(α − α*) = 0, 0 ≤ α, α* ≤ C,
//!
//! posed over 2n variables with labels ±1 and second-order working-set
//! selection.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const TAU: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct SmoSolution {
    pub alpha: Vec<f64>,
    pub alpha_star: Vec<f64>,
    pub bias: f64,
    pub violation: f64,
}

pub(crate) fn solve(
    k: &DMatrix<f64>,
    y: &[f64],
    c: f64,
    eps: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SmoSolution> {
    let n = y.len();
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let base = |t: usize| if t < n { t } else { t - n };
    let mut a = vec![0.0; l];
    let mut g: Vec<f64> = (0..l)
        .map(|t| if t < n { eps - y[t] } else { eps + y[t - n] })
        .collect();
    let diag: Vec<f64> = (0..n).map(|i| k[(i, i)]).collect();

    let mut violation = f64::INFINITY;
    for _ in 0..max_iter {
        // i maximizes −y_t ∇_t over the up set
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..l {
            let up = if sign(t) > 0.0 { a[t] < c } else { a[t] > 0.0 };
            if up && -sign(t) * g[t] >= gmax {
                gmax = -sign(t) * g[t];
                i_sel = t;
            }
        }
        // j minimizes the second-order objective decrease over the low set
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..l {
            let low = if sign(t) > 0.0 { a[t] > 0.0 } else { a[t] < c };
            if !low {
                continue;
            }
            let yg = sign(t) * g[t];
            gmax2 = gmax2.max(yg);
            if i_sel == usize::MAX {
                continue;
            }
            let grad_diff = gmax + yg;
            if grad_diff > 0.0 {
                let (bi, bt) = (base(i_sel), base(t));
                let mut quad = diag[bi] + diag[bt] - 2.0 * k[(bi, bt)];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -grad_diff * grad_diff / quad;
                if obj <= best {
                    best = obj;
                    j_sel = t;
                }
            }
        }
        violation = gmax + gmax2;
        if violation < tol || j_sel == usize::MAX {
            violation = violation.max(0.0);
            return Ok(finish(n, &a, &g, c, violation));
        }
        let (i, j) = (i_sel, j_sel);
        let (bi, bj) = (base(i), base(j));
        let (old_i, old_j) = (a[i], a[j]);
        let mut quad = diag[bi] + diag[bj] - 2.0 * k[(bi, bj)];
        if quad <= 0.0 {
            quad = TAU;
        }
        if sign(i) != sign(j) {
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }
        let (di, dj) = (a[i] - old_i, a[j] - old_j);
        // ∇ += Q[:, i]·Δα_i + Q[:, j]·Δα_j with Q_st = y_s y_t K
        let (si, sj) = (sign(i) * di, sign(j) * dj);
        let (ki, kj) = (k.column(bi), k.column(bj));
        for (t, gt) in g.iter_mut().enumerate().take(l) {
            let bt = base(t);
            *gt += sign(t) * (si * ki[bt] + sj * kj[bt]);
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        violation,
    })
}

fn finish(n: usize, a: &[f64], g: &[f64], c: f64, violation: f64) -> SmoSolution {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..2 * n {
        let s = if t < n { 1.0 } else { -1.0 };
        let yg = s * g[t];
        if a[t] >= c {
            if s < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[t] <= 0.0 {
            if s > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    let rho = if free > 0 {
        sum_free / free as f64
    } else {
        0.5 * (ub + lb)
    };
    SmoSolution {
        alpha: a[..n].to_vec(),
        alpha_star: a[n..].to_vec(),
        bias: -rho,
        violation,
    }
}
