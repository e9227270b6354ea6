#![allow(clippy::too_many_arguments, clippy::type_complexity)]
//! Dense QP oracles solved by an interior-point solver, independent of the
//! crate's SMO, Cholesky and SOR code paths.
#![allow(dead_code)]

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use nalgebra::{DMatrix, DVector};
use rampcast::svr::{SvrCoef, SvrModel};

/// Minimizes ½xᵀPx + qᵀx subject to `zero` equality rows followed by
/// nonnegative rows of `Ax + s = b`. Returns (x, objective).
pub fn solve_qp(p: &DMatrix<f64>, q: &[f64], a: &DMatrix<f64>, b: &[f64], zero: usize) -> (Vec<f64>, f64) {
    let dense = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    };
    let pm = CscMatrix::from(&dense(p)).to_triu();
    let am = CscMatrix::from(&dense(a));
    let mut cones = Vec::new();
    if zero > 0 {
        cones.push(SupportedConeT::ZeroConeT(zero));
    }
    if a.nrows() > zero {
        cones.push(SupportedConeT::NonnegativeConeT(a.nrows() - zero));
    }
    let settings = DefaultSettings {
        verbose: false,
        tol_gap_abs: 1e-12,
        tol_gap_rel: 1e-12,
        tol_feas: 1e-12,
        tol_ktratio: 1e-10,
        max_iter: 500,
        ..DefaultSettings::default()
    };
    let mut solver = DefaultSolver::new(&pm, q, &am, b, &cones, settings).expect("valid QP");
    solver.solve();
    let status = solver.solution.status;
    assert!(
        matches!(status, SolverStatus::Solved | SolverStatus::AlmostSolved),
        "oracle QP status {status:?}"
    );
    (solver.solution.x.clone(), solver.solution.obj_val)
}

pub fn gram(model: &SvrModel) -> DMatrix<f64> {
    model.kernel.gram(&model.support)
}

/// ε-SVR dual ½βᵀKβ + εΣ(α + α*) − yᵀβ with β = α − α*.
pub fn eps_svr_dual_objective(k: &DMatrix<f64>, y: &[f64], eps: f64, alpha: &[f64], alpha_star: &[f64]) -> f64 {
    let beta = DVector::from_iterator(y.len(), alpha.iter().zip(alpha_star).map(|(a, s)| a - s));
    let quad = 0.5 * beta.dot(&(k * &beta));
    let lin: f64 = alpha.iter().zip(alpha_star).map(|(a, s)| eps * (a + s)).sum();
    quad + lin - beta.iter().zip(y).map(|(b, v)| b * v).sum::<f64>()
}

/// Optimum of the ε-SVR dual over [α; α*] ∈ [0, C]²ⁿ with Σ(α − α*) = 0.
pub fn eps_svr_dual_oracle(k: &DMatrix<f64>, y: &[f64], c: f64, eps: f64) -> f64 {
    let n = y.len();
    let mut p = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = k[(i, j)];
            p[(i, j)] = v;
            p[(n + i, n + j)] = v;
            p[(i, n + j)] = -v;
            p[(n + i, j)] = -v;
        }
    }
    let q: Vec<f64> = y.iter().map(|v| eps - v).chain(y.iter().map(|v| eps + v)).collect();
    let mut a = DMatrix::zeros(1 + 4 * n, 2 * n);
    let mut b = vec![0.0; 1 + 4 * n];
    for i in 0..n {
        a[(0, i)] = 1.0;
        a[(0, n + i)] = -1.0;
    }
    for i in 0..2 * n {
        a[(1 + i, i)] = -1.0;
        a[(1 + 2 * n + i, i)] = 1.0;
        b[1 + 2 * n + i] = c;
    }
    solve_qp(&p, &q, &a, &b, 1).1
}

/// LSSVR dual ½αᵀ(K + I/γ)α − yᵀα.
pub fn lssvr_dual_objective(k: &DMatrix<f64>, y: &[f64], gamma: f64, alpha: &[f64]) -> f64 {
    let a = DVector::from_column_slice(alpha);
    let h = k + DMatrix::identity(y.len(), y.len()) / gamma;
    0.5 * a.dot(&(h * &a)) - a.iter().zip(y).map(|(x, v)| x * v).sum::<f64>()
}

/// Optimum of the LSSVR dual subject to Σα = 0.
pub fn lssvr_dual_oracle(k: &DMatrix<f64>, y: &[f64], gamma: f64) -> f64 {
    let n = y.len();
    let p = k + DMatrix::identity(n, n) / gamma;
    let q: Vec<f64> = y.iter().map(|v| -v).collect();
    let a = DMatrix::from_element(1, n, 1.0);
    solve_qp(&p, &q, &a, &[0.0], 1).1
}

/// Which side of `hinge` the bound function is pushed to.
#[derive(Debug, Clone, Copy)]
pub enum Side {
    /// Penalizes Gu − hinge > 0.
    Below,
    /// Penalizes hinge − Gu > 0.
    Above,
}

/// G = [K e].
pub fn augmented(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    let mut g = DMatrix::from_element(n, n + 1, 1.0);
    g.view_mut((0, 0), (n, n)).copy_from(k);
    g
}

/// ½‖fit − Gu‖² + ½λ‖u‖² + C·Σ hinge.
pub fn twin_primal_objective(
    k: &DMatrix<f64>,
    fit: &[f64],
    hinge: &[f64],
    lambda: f64,
    c: f64,
    side: Side,
    w: &[f64],
    b: f64,
) -> f64 {
    let g = augmented(k);
    let u = DVector::from_iterator(w.len() + 1, w.iter().copied().chain(std::iter::once(b)));
    let gu = &g * &u;
    let resid: f64 = gu.iter().zip(fit).map(|(a, f)| (f - a) * (f - a)).sum();
    let slack: f64 = gu
        .iter()
        .zip(hinge)
        .map(|(a, h)| match side {
            Side::Below => (a - h).max(0.0),
            Side::Above => (h - a).max(0.0),
        })
        .sum();
    0.5 * resid + 0.5 * lambda * u.norm_squared() + c * slack
}

/// Optimum of the same primal as a QP over [u; ξ].
pub fn twin_primal_oracle(k: &DMatrix<f64>, fit: &[f64], hinge: &[f64], lambda: f64, c: f64, side: Side) -> f64 {
    let n = k.nrows();
    let m = n + 1;
    let g = augmented(k);
    let mut p = DMatrix::zeros(m + n, m + n);
    let gtg = g.transpose() * &g + DMatrix::identity(m, m) * lambda;
    p.view_mut((0, 0), (m, m)).copy_from(&gtg);
    let f = DVector::from_column_slice(fit);
    let gtf = g.transpose() * &f;
    let q: Vec<f64> = gtf.iter().map(|v| -v).chain(std::iter::repeat_n(c, n)).collect();
    let mut a = DMatrix::zeros(2 * n, m + n);
    let mut b = vec![0.0; 2 * n];
    let sign = match side {
        Side::Below => 1.0,
        Side::Above => -1.0,
    };
    for i in 0..n {
        for j in 0..m {
            a[(i, j)] = sign * g[(i, j)];
        }
        a[(i, m + i)] = -1.0;
        b[i] = sign * hinge[i];
        a[(n + i, m + i)] = -1.0;
    }
    solve_qp(&p, &q, &a, &b, 0).1 + 0.5 * f.norm_squared()
}

pub fn twin_coef(model: &SvrModel) -> (&[f64], f64, &[f64], f64) {
    match &model.coef {
        SvrCoef::Twin { w1, b1, w2, b2 } => (w1, *b1, w2, *b2),
        SvrCoef::Single { .. } => panic!("not a twin model"),
    }
}

pub fn single_coef(model: &SvrModel) -> (&[f64], f64, Option<&[f64]>, Option<&[f64]>) {
    match &model.coef {
        SvrCoef::Single {
            coef,
            bias,
            alpha,
            alpha_star,
        } => (coef, *bias, alpha.as_deref(), alpha_star.as_deref()),
        SvrCoef::Twin { .. } => panic!("not a single-function model"),
    }
}

pub fn relative_gap(ours: f64, oracle: f64) -> f64 {
    (ours - oracle).abs() / oracle.abs().max(ours.abs()).max(f64::MIN_POSITIVE)
}
