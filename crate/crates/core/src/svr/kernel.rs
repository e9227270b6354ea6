use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Rbf,
    Linear,
}

/// `Rbf`: k(x, y) = exp(-‖x − y‖² / (2σ²)). `Linear`: k(x, y) = xᵀy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub sigma: f64,
}

impl Kernel {
    pub fn rbf(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("RBF bandwidth must be positive, got {sigma}")));
        }
        Ok(Self {
            kind: KernelKind::Rbf,
            sigma,
        })
    }

    pub fn linear() -> Self {
        Self {
            kind: KernelKind::Linear,
            sigma: 1.0,
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-d2 / (2.0 * self.sigma * self.sigma)).exp()
            }
            KernelKind::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }

    /// Symmetric Gram matrix of `x` with itself.
    pub fn gram(&self, x: &[Vec<f64>]) -> DMatrix<f64> {
        let n = x.len();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.eval(&x[i], &x[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    /// k(x, s) for every support row s.
    pub fn row(&self, x: &[f64], support: &[Vec<f64>]) -> Vec<f64> {
        support.iter().map(|s| self.eval(x, s)).collect()
    }
}

/// Per-column z-scoring with training statistics. A constant column keeps
/// unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let p = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut mean = vec![0.0; p];
        for row in x {
            mean.iter_mut().zip(row).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; p];
        for row in x {
            var.iter_mut()
                .zip(row.iter().zip(&mean))
                .for_each(|(s, (v, m))| *s += (v - m) * (v - m) / n);
        }
        let sd = var
            .into_iter()
            .map(|v| if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 })
            .collect();
        Self { mean, sd }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

/// Checks a training set and returns its column count.
pub(crate) fn check_xy(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::size("training set is empty"));
    }
    if x.len() != y.len() {
        return Err(Error::shape(format!(
            "{} feature rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    let p = check_rows(x, x[0].len())?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("targets contain non-finite values"));
    }
    Ok(p)
}

/// Checks every row has `p` finite columns.
pub(crate) fn check_rows(x: &[Vec<f64>], p: usize) -> Result<usize> {
    for (i, row) in x.iter().enumerate() {
        if row.len() != p {
            return Err(Error::shape(format!(
                "row {i} has {} columns, expected {p}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!("row {i} contains non-finite values")));
        }
    }
    Ok(p)
}
