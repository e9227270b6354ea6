use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::FeatureMatrix;
use super::models::ModelSettings;
use crate::error::{Error, Result};
use crate::svr::SvrVariant;

/// RBF bandwidths and regularization values, each a set of powers of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub sigmas: Vec<f64>,
    pub cs: Vec<f64>,
}

impl Grid {
    pub fn powers_of_two(lo: i32, hi: i32, step: i32) -> Result<Vec<f64>> {
        if step <= 0 || lo > hi {
            return Err(Error::Config(format!("bad exponent range {lo}..={hi} step {step}")));
        }
        Ok((lo..=hi).step_by(step as usize).map(|e| 2f64.powi(e)).collect())
    }

    /// 2⁻¹⁰, 2⁻⁹, ..., 2¹⁰ for both σ and C.
    pub fn paper() -> Self {
        let v = Self::powers_of_two(-10, 10, 1).expect("static range");
        Self {
            sigmas: v.clone(),
            cs: v,
        }
    }

    /// Every fifth exponent of the full range.
    pub fn desk() -> Self {
        let v = Self::powers_of_two(-10, 10, 5).expect("static range");
        Self {
            sigmas: v.clone(),
            cs: v,
        }
    }

    /// (σ, C) pairs ordered by C, then σ.
    pub fn candidates(&self) -> Vec<(f64, f64)> {
        let mut cs = self.cs.clone();
        let mut sigmas = self.sigmas.clone();
        cs.sort_by(f64::total_cmp);
        sigmas.sort_by(f64::total_cmp);
        cs.iter()
            .flat_map(|&c| sigmas.iter().map(move |&s| (s, c)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutcome {
    pub sigma: f64,
    pub c: f64,
    pub val_rmse: f64,
    pub evaluated: usize,
    pub failures: Vec<String>,
}

/// Scores every candidate with `eval(σ, C)` (in parallel) and returns the
/// lowest score; ties go to the smaller C, then the smaller σ.
pub fn search_with<F>(grid: &Grid, eval: F) -> Result<GridOutcome>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let candidates = grid.candidates();
    if candidates.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    let scores: Vec<Result<f64>> = candidates
        .par_iter()
        .map(|&(s, c)| eval(s, c))
        .collect();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut failures = Vec::new();
    for (&(s, c), score) in candidates.iter().zip(scores) {
        match score {
            Ok(v) if v.is_finite() => {
                if best.is_none_or(|b| v < b.2) {
                    best = Some((s, c, v));
                }
            }
            Ok(v) => failures.push(format!("σ={s}, C={c}: validation RMSE {v}")),
            Err(e) => failures.push(format!("σ={s}, C={c}: {e}")),
        }
    }
    match best {
        Some((sigma, c, val_rmse)) => Ok(GridOutcome {
            sigma,
            c,
            val_rmse,
            evaluated: candidates.len(),
            failures,
        }),
        None => Err(Error::Search(failures)),
    }
}

/// Chronological holdout: fits on the leading rows of `train`, scores RMSE
/// on the trailing `holdout_frac` share.
pub fn grid_search(
    train: &FeatureMatrix,
    variant: SvrVariant,
    grid: &Grid,
    settings: &ModelSettings,
    holdout_frac: f64,
) -> Result<GridOutcome> {
    if !(holdout_frac > 0.0 && holdout_frac < 1.0) {
        return Err(Error::domain(format!("holdout fraction must lie in (0, 1), got {holdout_frac}")));
    }
    let n = train.len();
    let n_val = ((n as f64) * holdout_frac).round() as usize;
    if n_val < 1 || n - n_val < 2 {
        return Err(Error::size(format!("{n} training rows cannot be split for validation")));
    }
    let fit = train.slice(0..n - n_val);
    let val = train.slice(n - n_val..n);
    search_with(grid, |sigma, c| {
        let m = settings.fit_svr(variant, &fit.rows, &fit.targets, sigma, c)?;
        let pred = m.predict(&val.rows)?;
        let sse: f64 = pred.iter().zip(&val.targets).map(|(p, t)| (p - t) * (p - t)).sum();
        Ok((sse / n_val as f64).sqrt())
    })
}
