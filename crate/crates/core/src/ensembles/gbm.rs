//! Gradient boosting with squared-error loss: F_m = F_{m−1} + η·Δ_m, each
//! Δ_m a shallow tree fitted to the residuals y − F_{m−1}(x).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::svr::{check_rows, check_xy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmParams {
    pub n_trees: usize,
    pub eta: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for GbmParams {
    fn default() -> Self {
        Self {
            n_trees: 500,
            eta: 0.05,
            max_depth: 3,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub f0: f64,
    pub stages: Vec<RegressionTree>,
    pub eta: f64,
    pub dim: usize,
    /// Training loss after f0 and after each stage.
    pub train_loss: Vec<f64>,
}

impl GbmModel {
    pub fn n_trees(&self) -> usize {
        self.stages.len()
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.predict_stages(x, self.stages.len())
    }

    /// F_m(x) using only the first `m` stages.
    pub fn predict_stages(&self, x: &[Vec<f64>], m: usize) -> Result<Vec<f64>> {
        check_rows(x, self.dim)?;
        let m = m.min(self.stages.len());
        Ok(x
            .iter()
            .map(|row| {
                self.stages[..m]
                    .iter()
                    .fold(self.f0, |f, t| f + self.eta * t.predict_row(row))
            })
            .collect())
    }
}

/// L₂ = (1/N) Σ (yᵢ − ŷᵢ)².
pub fn l2_loss(y: &[f64], yhat: &[f64]) -> f64 {
    y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}

/// ∂/∂ŷ (y − ŷ)² = −2(y − ŷ).
pub fn l2_gradient(y: f64, yhat: f64) -> f64 {
    -2.0 * (y - yhat)
}

pub fn fit_gbm(x: &[Vec<f64>], y: &[f64], params: GbmParams) -> Result<GbmModel> {
    let dim = check_xy(x, y)?;
    if params.n_trees == 0 {
        return Err(Error::domain("GBM needs at least one stage"));
    }
    if !(params.eta > 0.0 && params.eta <= 1.0) {
        return Err(Error::domain(format!("learning rate must lie in (0, 1], got {}", params.eta)));
    }
    let n = y.len() as f64;
    let f0 = y.iter().sum::<f64>() / n;
    let mut fitted = vec![f0; y.len()];
    let mut train_loss = vec![l2_loss(y, &fitted)];
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry: None,
    };
    // every feature is considered, so the generator is never drawn from
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    let mut stages = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        // negative half-gradient of the squared loss
        let residual: Vec<f64> = y.iter().zip(&fitted).map(|(a, f)| a - f).collect();
        let tree = fit_tree(x, &residual, tree_params, &mut unused)?;
        for (f, row) in fitted.iter_mut().zip(x) {
            *f += params.eta * tree.predict_row(row);
        }
        train_loss.push(l2_loss(y, &fitted));
        stages.push(tree);
    }
    Ok(GbmModel {
        f0,
        stages,
        eta: params.eta,
        dim,
        train_loss,
    })
}
