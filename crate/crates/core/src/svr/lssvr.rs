//! Least-squares SVR: solves [[0, eᵀ], [e, K + I/γ]]·[b; α] = [0; y] by a
//! Cholesky factorization of K + I/γ and elimination of b.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) fn solve(k: &DMatrix<f64>, y: &[f64], gamma: f64) -> Result<(Vec<f64>, f64)> {
    let n = y.len();
    let mut a = k.clone();
    for i in 0..n {
        a[(i, i)] += 1.0 / gamma;
    }
    let chol = nalgebra::Cholesky::new(a.clone())
        .ok_or_else(|| Error::Singular(format!("K + I/γ not positive definite (γ = {gamma})")))?;
    let yv = DVector::from_column_slice(y);
    let ones = DVector::from_element(n, 1.0);
    let nu = refine(&chol, &a, &yv);
    let eta = refine(&chol, &a, &ones);
    let denom = eta.sum();
    if !(denom.abs() > f64::MIN_POSITIVE) {
        return Err(Error::Singular("eᵀ(K + I/γ)⁻¹e vanishes".into()));
    }
    let b = nu.sum() / denom;
    let alpha = nu - &eta * b;

    let resid_sum = alpha.sum();
    let resid_rows = (&a * &alpha).add_scalar(b) - &yv;
    let resid = (resid_sum * resid_sum + resid_rows.norm_squared()).sqrt();
    if !(resid <= 1e-8 * yv.norm().max(f64::MIN_POSITIVE)) {
        return Err(Error::Singular(format!(
            "saddle-system residual {resid:.3e} exceeds tolerance (γ = {gamma})"
        )));
    }
    Ok((alpha.as_slice().to_vec(), b))
}

/// Solve followed by one step of iterative refinement.
fn refine(chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>, a: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let x = chol.solve(rhs);
    let r = rhs - a * &x;
    x + chol.solve(&r)
}
