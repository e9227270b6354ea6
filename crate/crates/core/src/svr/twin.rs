//! Twin SVR duals. Both variants reduce, with G = [K e] and
//! M = GGᵀ + λI, to box QPs min ½αᵀPα + qᵀα, 0 ≤ α ≤ C, where
//! P = G(GᵀG + λI)⁻¹Gᵀ = I − λM⁻¹ and the bound function coefficients are
//! [w; b] = GᵀM⁻¹r for a right-hand side r depending on α.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Coordinate-wise projected relaxation for min ½αᵀPα + qᵀα over
/// 0 ≤ α ≤ upper. With ω = 1 this is exact coordinate descent.
pub(crate) fn box_qp(
    p: &DMatrix<f64>,
    q: &[f64],
    upper: f64,
    omega: f64,
    tol: f64,
    max_sweeps: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = q.len();
    let mut alpha = vec![0.0; n];
    let mut grad = q.to_vec();
    let mut violation = kkt_violation(&alpha, &grad, upper);
    if violation <= tol {
        return Ok((alpha, violation));
    }
    for _ in 0..max_sweeps {
        for i in 0..n {
            let pii = p[(i, i)];
            let target = if pii > 1e-14 {
                alpha[i] - omega * grad[i] / pii
            } else if grad[i] > 0.0 {
                0.0
            } else if grad[i] < 0.0 {
                upper
            } else {
                alpha[i]
            };
            let next = target.clamp(0.0, upper);
            let d = next - alpha[i];
            if d != 0.0 {
                alpha[i] = next;
                grad.iter_mut()
                    .zip(p.column(i).iter())
                    .for_each(|(g, pc)| *g += d * pc);
            }
        }
        violation = kkt_violation(&alpha, &grad, upper);
        if violation <= tol {
            return Ok((alpha, violation));
        }
    }
    Err(Error::Convergence {
        iterations: max_sweeps,
        violation,
    })
}

/// Largest projected-gradient component.
pub(crate) fn kkt_violation(alpha: &[f64], grad: &[f64], upper: f64) -> f64 {
    alpha
        .iter()
        .zip(grad)
        .map(|(&a, &g)| {
            if a <= 0.0 {
                (-g).max(0.0)
            } else if a >= upper {
                g.max(0.0)
            } else {
                g.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Factorization shared by the two subproblems of a twin fit.
pub(crate) struct TwinSystem<'a> {
    k: &'a DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    pub p: DMatrix<f64>,
}

impl<'a> TwinSystem<'a> {
    pub fn new(k: &'a DMatrix<f64>, lambda: f64) -> Result<Self> {
        let n = k.nrows();
        let mut m = k * k;
        m.add_scalar_mut(1.0);
        for i in 0..n {
            m[(i, i)] += lambda;
        }
        let chol = Cholesky::new(m)
            .ok_or_else(|| Error::Singular(format!("GGᵀ + λI not positive definite (λ = {lambda})")))?;
        let mut p = chol.inverse();
        p *= -lambda;
        for i in 0..n {
            p[(i, i)] += 1.0;
        }
        // symmetrize away rounding
        let p = (&p + p.transpose()) * 0.5;
        Ok(Self { k, chol, p })
    }

    pub fn p_times(&self, v: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(v);
        (&self.p * v).as_slice().to_vec()
    }

    /// [w; b] = GᵀM⁻¹r.
    pub fn coefficients(&self, r: &[f64]) -> (Vec<f64>, f64) {
        let v = self.chol.solve(&DVector::from_column_slice(r));
        let w = self.k * &v;
        (w.as_slice().to_vec(), v.sum())
    }
}
