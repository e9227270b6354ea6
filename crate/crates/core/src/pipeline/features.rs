use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigproc::dwt_decompose;

pub const FEATURE_LEVELS: usize = 5;

/// Rows of wavelet band values [A5, D1..D5] at timestep t with target s(t+1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Source timestep of each row.
    pub index_map: Vec<usize>,
    pub names: Vec<String>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    /// Rows `range` as a new matrix.
    pub fn slice(&self, range: std::ops::Range<usize>) -> FeatureMatrix {
        FeatureMatrix {
            rows: self.rows[range.clone()].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            index_map: self.index_map[range].to_vec(),
            names: self.names.clone(),
        }
    }

    /// The last `n` rows (all rows when `n` exceeds the length).
    pub fn tail(&self, n: usize) -> FeatureMatrix {
        self.slice(self.len().saturating_sub(n)..self.len())
    }
}

fn band_names() -> Vec<String> {
    std::iter::once(format!("a{FEATURE_LEVELS}"))
        .chain((1..=FEATURE_LEVELS).map(|j| format!("d{j}")))
        .collect()
}

/// Decomposes the whole series once; row t holds the band values at t and
/// targets s(t+1), so the last timestep yields no row.
pub fn build_features(s: &[f64]) -> Result<FeatureMatrix> {
    let bands = dwt_decompose(s, FEATURE_LEVELS)?;
    let n = s.len();
    Ok(FeatureMatrix {
        rows: (0..n - 1).map(|t| bands.row(t)).collect(),
        targets: s[1..].to_vec(),
        index_map: (0..n - 1).collect(),
        names: band_names(),
    })
}

/// Features that use no sample after the row's timestep: rows before
/// `train_end` come from decomposing `s[..train_end]`, and each later row t
/// takes the final band values of the decomposition of `s[..=t]`.
pub fn build_features_causal(s: &[f64], train_end: usize) -> Result<FeatureMatrix> {
    let n = s.len();
    if train_end == 0 || train_end >= n {
        return Err(Error::size(format!(
            "training prefix {train_end} must lie strictly inside the series of length {n}"
        )));
    }
    let head = dwt_decompose(&s[..train_end], FEATURE_LEVELS)?;
    let mut rows: Vec<Vec<f64>> = (0..train_end).map(|t| head.row(t)).collect();
    for t in train_end..n - 1 {
        let bands = dwt_decompose(&s[..=t], FEATURE_LEVELS)?;
        rows.push(bands.row(t));
    }
    Ok(FeatureMatrix {
        rows,
        targets: s[1..].to_vec(),
        index_map: (0..n - 1).collect(),
        names: band_names(),
    })
}
