//! SVR-family regressors: ε-SVR, least-squares SVR, twin SVR and ε-twin SVR.
//!
//! All variants z-score their inputs with training statistics before kernel
//! evaluation and keep the scaled training rows as support data.

mod kernel;
mod lssvr;
mod smo;
mod twin;

use serde::{Deserialize, Serialize};

pub use kernel::{Kernel, KernelKind, Scaler};
pub(crate) use kernel::{check_rows, check_xy};

use crate::error::{Error, Result};

pub const KKT_TOLERANCE: f64 = 1e-6;
/// SOR stopping tolerance for the twin duals. The primal is recovered
/// through M⁻¹, which scales dual error by up to 1/λ.
pub const TWIN_KKT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_EPSILON: f64 = 0.01;
const SMO_MAX_ITER_PER_ROW: usize = 2_000;
const SMO_MIN_MAX_ITER: usize = 200_000;
const MAX_SWEEPS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvrVariant {
    EpsSvr,
    Lssvr,
    Tsvr,
    EpsTsvr,
}

impl SvrVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            SvrVariant::EpsSvr => "eps_svr",
            SvrVariant::Lssvr => "lssvr",
            SvrVariant::Tsvr => "tsvr",
            SvrVariant::EpsTsvr => "eps_tsvr",
        }
    }
}

/// Twin SVR settings. `delta` is the ridge added to GᵀG so the two
/// least-squares subproblems stay well posed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsvrParams {
    pub c1: f64,
    pub c2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta: f64,
}

impl TsvrParams {
    pub fn new(c1: f64, c2: f64, eps1: f64, eps2: f64) -> Self {
        Self {
            c1,
            c2,
            eps1,
            eps2,
            delta: 1e-7,
        }
    }
}

/// ε-twin SVR settings; `omega` is the over-relaxation factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsTsvrParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub omega: f64,
}

impl EpsTsvrParams {
    pub fn new(c1: f64, c2: f64, c3: f64, c4: f64, eps1: f64, eps2: f64) -> Self {
        Self {
            c1,
            c2,
            c3,
            c4,
            eps1,
            eps2,
            omega: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum SvrParams {
    EpsSvr { c: f64, eps: f64 },
    Lssvr { gamma: f64 },
    Tsvr(TsvrParams),
    EpsTsvr(EpsTsvrParams),
}

impl SvrParams {
    pub fn variant(&self) -> SvrVariant {
        match self {
            SvrParams::EpsSvr { .. } => SvrVariant::EpsSvr,
            SvrParams::Lssvr { .. } => SvrVariant::Lssvr,
            SvrParams::Tsvr(_) => SvrVariant::Tsvr,
            SvrParams::EpsTsvr(_) => SvrVariant::EpsTsvr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum SvrCoef {
    /// g(x) = Σ coef_i k(x, x_i) + bias. For ε-SVR, coef = α − α*.
    Single {
        coef: Vec<f64>,
        bias: f64,
        alpha: Option<Vec<f64>>,
        alpha_star: Option<Vec<f64>>,
    },
    /// f_j(x) = Σ w_j,i k(x, x_i) + b_j and g = ½(f₁ + f₂).
    Twin {
        w1: Vec<f64>,
        b1: f64,
        w2: Vec<f64>,
        b2: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub params: SvrParams,
    pub kernel: Kernel,
    pub scaler: Scaler,
    /// Scaled training rows.
    pub support: Vec<Vec<f64>>,
    pub coef: SvrCoef,
    /// Final KKT residual of the dual solver (0 for the direct solve).
    pub kkt_violation: f64,
}

impl SvrModel {
    pub fn variant(&self) -> SvrVariant {
        self.params.variant()
    }

    pub fn dim(&self) -> usize {
        self.scaler.dim()
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        check_rows(x, self.dim())?;
        Ok(x
            .iter()
            .map(|row| {
                let k = self.kernel.row(&self.scaler.transform_row(row), &self.support);
                match &self.coef {
                    SvrCoef::Single { coef, bias, .. } => dot(coef, &k) + bias,
                    SvrCoef::Twin { w1, b1, w2, b2 } => {
                        0.5 * ((dot(w1, &k) + b1) + (dot(w2, &k) + b2))
                    }
                }
            })
            .collect())
    }

    /// Down- and up-bound functions of a twin model.
    pub fn predict_bounds(&self, x: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_rows(x, self.dim())?;
        let SvrCoef::Twin { w1, b1, w2, b2 } = &self.coef else {
            return Err(Error::domain(format!(
                "{} has no bound functions",
                self.variant().as_str()
            )));
        };
        Ok(x
            .iter()
            .map(|row| {
                let k = self.kernel.row(&self.scaler.transform_row(row), &self.support);
                (dot(w1, &k) + b1, dot(w2, &k) + b2)
            })
            .unzip())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn prepare(x: &[Vec<f64>], y: &[f64]) -> Result<(Scaler, Vec<Vec<f64>>)> {
    check_xy(x, y)?;
    let scaler = Scaler::fit(x);
    let support = scaler.transform(x);
    Ok((scaler, support))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be non-negative, got {v}")))
    }
}

pub fn fit_eps_svr(x: &[Vec<f64>], y: &[f64], kernel: Kernel, c: f64, eps: f64) -> Result<SvrModel> {
    positive("C", c)?;
    non_negative("ε", eps)?;
    if y.len() < 2 {
        return Err(Error::size("ε-SVR needs at least 2 training rows"));
    }
    let (scaler, support) = prepare(x, y)?;
    let k = kernel.gram(&support);
    let max_iter = (SMO_MAX_ITER_PER_ROW * y.len()).max(SMO_MIN_MAX_ITER);
    let sol = smo::solve(&k, y, c, eps, KKT_TOLERANCE, max_iter)?;
    let coef = sol
        .alpha
        .iter()
        .zip(&sol.alpha_star)
        .map(|(a, s)| a - s)
        .collect();
    Ok(SvrModel {
        params: SvrParams::EpsSvr { c, eps },
        kernel,
        scaler,
        support,
        coef: SvrCoef::Single {
            coef,
            bias: sol.bias,
            alpha: Some(sol.alpha),
            alpha_star: Some(sol.alpha_star),
        },
        kkt_violation: sol.violation,
    })
}

pub fn fit_lssvr(x: &[Vec<f64>], y: &[f64], kernel: Kernel, gamma: f64) -> Result<SvrModel> {
    positive("γ", gamma)?;
    let (scaler, support) = prepare(x, y)?;
    let k = kernel.gram(&support);
    let (coef, bias) = lssvr::solve(&k, y, gamma)?;
    Ok(SvrModel {
        params: SvrParams::Lssvr { gamma },
        kernel,
        scaler,
        support,
        coef: SvrCoef::Single {
            coef,
            bias,
            alpha: None,
            alpha_star: None,
        },
        kkt_violation: 0.0,
    })
}

/// Down-bound f₁ tracks y − ε₁ with f₁ ≤ y − ε₁ + ξ; up-bound f₂ tracks
/// y + ε₂ with f₂ ≥ y + ε₂ − η.
pub fn fit_tsvr(x: &[Vec<f64>], y: &[f64], kernel: Kernel, p: TsvrParams) -> Result<SvrModel> {
    positive("C1", p.c1)?;
    positive("C2", p.c2)?;
    non_negative("ε1", p.eps1)?;
    non_negative("ε2", p.eps2)?;
    positive("δ", p.delta)?;
    let (scaler, support) = prepare(x, y)?;
    let k = kernel.gram(&support);
    let sys = twin::TwinSystem::new(&k, p.delta)?;

    let f1: Vec<f64> = y.iter().map(|v| v - p.eps1).collect();
    let pf1 = sys.p_times(&f1);
    let q1: Vec<f64> = f1.iter().zip(&pf1).map(|(f, pf)| f - pf).collect();
    let (a1, v1) = twin::box_qp(&sys.p, &q1, p.c1, 1.0, TWIN_KKT_TOLERANCE, MAX_SWEEPS)?;
    let r1: Vec<f64> = f1.iter().zip(&a1).map(|(f, a)| f - a).collect();
    let (w1, b1) = sys.coefficients(&r1);

    let f2: Vec<f64> = y.iter().map(|v| v + p.eps2).collect();
    let pf2 = sys.p_times(&f2);
    let q2: Vec<f64> = f2.iter().zip(&pf2).map(|(f, pf)| pf - f).collect();
    let (a2, v2) = twin::box_qp(&sys.p, &q2, p.c2, 1.0, TWIN_KKT_TOLERANCE, MAX_SWEEPS)?;
    let r2: Vec<f64> = f2.iter().zip(&a2).map(|(f, a)| f + a).collect();
    let (w2, b2) = sys.coefficients(&r2);

    Ok(SvrModel {
        params: SvrParams::Tsvr(p),
        kernel,
        scaler,
        support,
        coef: SvrCoef::Twin { w1, b1, w2, b2 },
        kkt_violation: v1.max(v2),
    })
}

/// Each bound minimizes ½C₃‖[w; b]‖² + ½‖y − f‖² plus a hinge on leaving
/// the ε-band: f₁ ≤ y + ε₁ + ξ, f₂ ≥ y − ε₂ − η. Duals are solved by
/// successive over-relaxation.
pub fn fit_eps_tsvr(x: &[Vec<f64>], y: &[f64], kernel: Kernel, p: EpsTsvrParams) -> Result<SvrModel> {
    for (name, v) in [("C1", p.c1), ("C2", p.c2), ("C3", p.c3), ("C4", p.c4)] {
        positive(name, v)?;
    }
    non_negative("ε1", p.eps1)?;
    non_negative("ε2", p.eps2)?;
    if !(p.omega > 0.0 && p.omega < 2.0) {
        return Err(Error::domain(format!("relaxation factor must lie in (0, 2), got {}", p.omega)));
    }
    let (scaler, support) = prepare(x, y)?;
    let k = kernel.gram(&support);
    let py_of = |sys: &twin::TwinSystem| sys.p_times(y);

    let sys1 = twin::TwinSystem::new(&k, p.c3)?;
    let py = py_of(&sys1);
    let q1: Vec<f64> = y.iter().zip(&py).map(|(v, pv)| v + p.eps1 - pv).collect();
    let (a1, v1) = twin::box_qp(&sys1.p, &q1, p.c1, p.omega, TWIN_KKT_TOLERANCE, MAX_SWEEPS)?;
    let r1: Vec<f64> = y.iter().zip(&a1).map(|(v, a)| v - a).collect();
    let (w1, b1) = sys1.coefficients(&r1);

    let sys2_owned;
    let sys2 = if p.c4 == p.c3 {
        &sys1
    } else {
        sys2_owned = twin::TwinSystem::new(&k, p.c4)?;
        &sys2_owned
    };
    let py = if p.c4 == p.c3 { py } else { py_of(sys2) };
    let q2: Vec<f64> = y.iter().zip(&py).map(|(v, pv)| pv - v + p.eps2).collect();
    let (a2, v2) = twin::box_qp(&sys2.p, &q2, p.c2, p.omega, TWIN_KKT_TOLERANCE, MAX_SWEEPS)?;
    let r2: Vec<f64> = y.iter().zip(&a2).map(|(v, a)| v + a).collect();
    let (w2, b2) = sys2.coefficients(&r2);

    Ok(SvrModel {
        params: SvrParams::EpsTsvr(p),
        kernel,
        scaler,
        support,
        coef: SvrCoef::Twin { w1, b1, w2, b2 },
        kkt_violation: v1.max(v2),
    })
}

/// Fits whichever variant `params` names.
pub fn fit(x: &[Vec<f64>], y: &[f64], kernel: Kernel, params: SvrParams) -> Result<SvrModel> {
    match params {
        SvrParams::EpsSvr { c, eps } => fit_eps_svr(x, y, kernel, c, eps),
        SvrParams::Lssvr { gamma } => fit_lssvr(x, y, kernel, gamma),
        SvrParams::Tsvr(p) => fit_tsvr(x, y, kernel, p),
        SvrParams::EpsTsvr(p) => fit_eps_tsvr(x, y, kernel, p),
    }
}

#[cfg(test)]
mod tests;
