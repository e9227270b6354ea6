//! CART regression trees grown by exact variance-reduction split search.

use rand::seq::index;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svr::{check_rows, check_xy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features drawn per split; `None` uses every feature.
    pub mtry: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: usize::MAX,
            min_leaf: 1,
            mtry: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub dim: usize,
    pub params: TreeParams,
}

impl RegressionTree {
    /// A single-leaf tree.
    pub fn constant(value: f64, dim: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
            dim,
            params: TreeParams {
                max_depth: 0,
                ..TreeParams::default()
            },
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        check_rows(x, self.dim)?;
        Ok(x.iter().map(|r| self.predict_row(r)).collect())
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

/// Grows a tree on all rows of `x`. Features are drawn with `rng` only when
/// `mtry` is smaller than the column count.
pub fn fit_tree(
    x: &[Vec<f64>],
    y: &[f64],
    params: TreeParams,
    rng: &mut dyn RngCore,
) -> Result<RegressionTree> {
    let rows: Vec<usize> = (0..y.len()).collect();
    fit_tree_on(x, y, &rows, params, rng)
}

/// Grows a tree on the listed rows (repeats allowed, as in a bootstrap).
pub fn fit_tree_on(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    params: TreeParams,
    rng: &mut dyn RngCore,
) -> Result<RegressionTree> {
    let dim = check_xy(x, y)?;
    if rows.is_empty() {
        return Err(Error::size("tree needs at least one training row"));
    }
    let mtry = params.mtry.unwrap_or(dim);
    if mtry == 0 || mtry > dim {
        return Err(Error::domain(format!("mtry must lie in 1..={dim}, got {mtry}")));
    }
    if params.min_leaf == 0 {
        return Err(Error::domain("min_leaf must be at least 1"));
    }
    let mut grower = Grower {
        x,
        y,
        params,
        mtry,
        dim,
        rng,
        nodes: Vec::new(),
    };
    let mut rows = rows.to_vec();
    grower.grow(&mut rows, 0);
    Ok(RegressionTree {
        nodes: grower.nodes,
        dim,
        params,
    })
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: TreeParams,
    mtry: usize,
    dim: usize,
    rng: &'a mut dyn RngCore,
    nodes: Vec<Node>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Grower<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let n = rows.len() as f64;
        let mean = rows.iter().map(|&i| self.y[i]).sum::<f64>() / n;
        self.nodes.push(Node::Leaf { value: mean });
        if depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf {
            return at;
        }
        let Some(best) = self.best_split(rows) else {
            return at;
        };
        // partition rows in place, keeping relative order on each side
        let (mut l, mut r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[i][best.feature] <= best.threshold);
        let n_left = l.len();
        let left = self.grow(&mut l, depth + 1);
        let right = self.grow(&mut r, depth + 1);
        debug_assert!(n_left >= self.params.min_leaf);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        at
    }

    fn features(&mut self) -> Vec<usize> {
        if self.mtry == self.dim {
            return (0..self.dim).collect();
        }
        let mut f = index::sample(&mut *self.rng, self.dim, self.mtry).into_vec();
        f.sort_unstable();
        f
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<Candidate> {
        let n = rows.len();
        let total: f64 = rows.iter().map(|&i| self.y[i]).sum();
        let sq: f64 = rows.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let parent = total * total / n as f64;
        let min_gain = 1e-12 * sq.max(f64::MIN_POSITIVE);
        let min_leaf = self.params.min_leaf;
        let mut best: Option<Candidate> = None;
        let mut order = rows.to_vec();
        for feature in self.features() {
            let col = |i: usize| self.x[i][feature];
            order.sort_by(|&a, &b| col(a).total_cmp(&col(b)));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.y[order[k]];
                let n_left = k + 1;
                let (lo, hi) = (col(order[k]), col(order[k + 1]));
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / (n - n_left) as f64
                    - parent;
                if gain > min_gain && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate {
                        feature,
                        threshold: midpoint(lo, hi),
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint of two distinct values, nudged so it separates them.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + 0.5 * (hi - lo);
    if m < hi {
        m
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(0)
    }

    #[test]
    fn constant_target_gives_single_leaf() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let t = fit_tree(&x, &[2.5; 20], TreeParams::default(), &mut rng()).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 2.5 }]);
    }

    #[test]
    fn binary_step_gives_depth_one_exact_fit() {
        let x: Vec<Vec<f64>> = (0..16).map(|i| vec![(i % 3) as f64, (i % 2) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| if r[1] > 0.5 { 4.0 } else { -1.0 }).collect();
        let t = fit_tree(&x, &y, TreeParams::default(), &mut rng()).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(t.predict(&x).unwrap(), y);
        assert!(matches!(t.nodes[0], Node::Split { feature: 1, threshold, .. } if threshold == 0.5));
    }

    #[test]
    fn min_leaf_equal_to_n_gives_mean_leaf() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let y = [1.0, 2.0, 3.0, 4.0, 5.0, 9.0];
        let p = TreeParams {
            min_leaf: 6,
            ..TreeParams::default()
        };
        let t = fit_tree(&x, &y, p, &mut rng()).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 4.0 }]);
    }

    #[test]
    fn ties_prefer_lowest_feature() {
        // both columns separate y identically
        let x: Vec<Vec<f64>> = (0..8).map(|i| vec![(i / 4) as f64, (i / 4) as f64 * 10.0]).collect();
        let y: Vec<f64> = (0..8).map(|i| (i / 4) as f64).collect();
        let t = fit_tree(&x, &y, TreeParams::default(), &mut rng()).unwrap();
        assert!(matches!(t.nodes[0], Node::Split { feature: 0, .. }));
    }

    #[test]
    fn rejects_bad_mtry() {
        let x = vec![vec![0.0, 1.0]];
        let p = TreeParams {
            mtry: Some(3),
            ..TreeParams::default()
        };
        assert!(fit_tree(&x, &[1.0], p, &mut rng()).is_err());
    }

    proptest! {
        #[test]
        fn leaves_are_means_and_predictions_bounded(
            data in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0, -5.0f64..5.0), 1..60),
            depth in 0usize..6,
            min_leaf in 1usize..5,
            seed in 0u64..100,
        ) {
            let x: Vec<Vec<f64>> = data.iter().map(|d| vec![d.0, d.1]).collect();
            let y: Vec<f64> = data.iter().map(|d| d.2).collect();
            let p = TreeParams { max_depth: depth, min_leaf, mtry: Some(1) };
            let t = fit_tree(&x, &y, p, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert!(t.depth() <= depth);
            let pred = t.predict(&x).unwrap();
            let lo = y.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for v in &pred {
                prop_assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12);
            }
            // every leaf value is the mean of the targets routed to it
            let mut sums = std::collections::HashMap::<u64, (f64, usize)>::new();
            for (v, t) in pred.iter().zip(&y) {
                let e = sums.entry(v.to_bits()).or_insert((0.0, 0));
                e.0 += t;
                e.1 += 1;
            }
            for (bits, (s, c)) in sums {
                prop_assert!((f64::from_bits(bits) - s / c as f64).abs() < 1e-9);
            }
        }
    }
}
