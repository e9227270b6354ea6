//! Random-forest regression: bootstrap-resampled trees with per-split
//! feature sampling, averaged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree_on, RegressionTree, TreeParams};
use crate::error::{Error, Result};
use crate::svr::{check_rows, check_xy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` draws ⌈p/3⌉ features per split.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            mtry: None,
            min_leaf: 5,
            max_depth: usize::MAX,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<RegressionTree>,
    pub mtry: usize,
    pub seed: u64,
    pub dim: usize,
}

impl ForestModel {
    pub fn from_trees(trees: Vec<RegressionTree>) -> Result<Self> {
        let dim = trees.first().map(|t| t.dim).ok_or_else(|| Error::size("forest needs at least one tree"))?;
        if trees.iter().any(|t| t.dim != dim) {
            return Err(Error::shape("trees disagree on feature count"));
        }
        Ok(Self {
            trees,
            mtry: dim,
            seed: 0,
            dim,
        })
    }

    /// Mean of the per-tree predictions.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        check_rows(x, self.dim)?;
        let k = self.trees.len() as f64;
        Ok(x
            .iter()
            .map(|row| self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / k)
            .collect())
    }
}

pub fn default_mtry(dim: usize) -> usize {
    dim.div_ceil(3).max(1)
}

/// Tree `t` draws from its own ChaCha stream derived from `seed`, so the fit
/// is deterministic regardless of thread count.
pub fn fit_rfr(x: &[Vec<f64>], y: &[f64], params: ForestParams) -> Result<ForestModel> {
    let dim = check_xy(x, y)?;
    if params.n_trees == 0 {
        return Err(Error::domain("forest needs at least one tree"));
    }
    let mtry = params.mtry.unwrap_or_else(|| default_mtry(dim));
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        mtry: Some(mtry),
    };
    let n = y.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(t as u64);
            let rows: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_tree_on(x, y, &rows, tree_params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        trees,
        mtry,
        seed: params.seed,
        dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::tree::fit_tree;

    fn data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..80)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.37).sin(), (t * 0.11).cos(), t / 80.0]
            })
            .collect();
        let y = x.iter().map(|r| 2.0 * r[0] - r[1] + r[2] * r[2]).collect();
        (x, y)
    }

    #[test]
    fn single_tree_without_bootstrap_is_cart() {
        let (x, y) = data();
        let p = ForestParams {
            n_trees: 1,
            mtry: Some(3),
            min_leaf: 2,
            bootstrap: false,
            ..ForestParams::default()
        };
        let f = fit_rfr(&x, &y, p).unwrap();
        let tp = TreeParams {
            max_depth: usize::MAX,
            min_leaf: 2,
            mtry: None,
        };
        let t = fit_tree(&x, &y, tp, &mut rand::rng()).unwrap();
        assert_eq!(f.trees[0].nodes, t.nodes);
        assert_eq!(f.predict(&x).unwrap(), t.predict(&x).unwrap());
    }

    #[test]
    fn stub_trees_average() {
        let f = ForestModel::from_trees(vec![RegressionTree::constant(1.0, 2), RegressionTree::constant(3.0, 2)]).unwrap();
        assert_eq!(f.predict(&[vec![0.0, 0.0]]).unwrap(), vec![2.0]);
    }

    #[test]
    fn identical_trees_match_single_tree() {
        let (x, y) = data();
        let t = fit_tree(&x, &y, TreeParams::default(), &mut rand::rng()).unwrap();
        let f = ForestModel::from_trees(vec![t.clone(); 4]).unwrap();
        let (a, b) = (f.predict(&x).unwrap(), t.predict(&x).unwrap());
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_for_seed_and_order_invariant() {
        let (x, y) = data();
        let p = ForestParams {
            n_trees: 12,
            seed: 42,
            ..ForestParams::default()
        };
        let a = fit_rfr(&x, &y, p).unwrap();
        let b = fit_rfr(&x, &y, p).unwrap();
        assert_eq!(a, b);
        let mut rev = a.clone();
        rev.trees.reverse();
        for (u, v) in a.predict(&x).unwrap().iter().zip(rev.predict(&x).unwrap()) {
            assert!((u - v).abs() < 1e-12);
        }
        let c = fit_rfr(&x, &y, ForestParams { seed: 43, ..p }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn predictions_stay_within_target_range() {
        let (x, y) = data();
        let f = fit_rfr(&x, &y, ForestParams { n_trees: 10, ..ForestParams::default() }).unwrap();
        let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let probe: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 - 25.0, 3.0, -1.0]).collect();
        for v in f.predict(&probe).unwrap() {
            assert!(v >= lo && v <= hi);
        }
    }

    #[test]
    fn default_mtry_is_third_rounded_up() {
        assert_eq!(default_mtry(6), 2);
        assert_eq!(default_mtry(7), 3);
        assert_eq!(default_mtry(1), 1);
    }
}
