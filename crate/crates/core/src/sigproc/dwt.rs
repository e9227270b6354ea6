//! Decimated multilevel db4 transform with half-sample symmetric extension,
//! and per-level band reconstruction to full series length.
//!
//! Analysis at one level keeps `floor((n + 7) / 2)` coefficients, enough
//! redundancy at the borders that synthesis restores the input exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Daubechies-4 (8-tap) scaling filter, lowpass normalised so Σh = √2.
pub const DB4_LOWPASS: [f64; 8] = [
    -0.010_597_401_785_069_032,
    0.032_883_011_666_885_2,
    0.030_841_381_835_560_764,
    -0.187_034_811_719_093_08,
    -0.027_983_769_416_859_854,
    0.630_880_767_929_858_9,
    0.714_846_570_552_915_6,
    0.230_377_813_308_896_5,
];

const TAPS: usize = DB4_LOWPASS.len();

/// Quadrature-mirror highpass: g[j] = (-1)^j h[7 - j].
pub fn db4_highpass() -> [f64; TAPS] {
    let mut g = [0.0; TAPS];
    for (j, gj) in g.iter_mut().enumerate() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *gj = sign * DB4_LOWPASS[TAPS - 1 - j];
    }
    g
}

/// Smallest input length accepted for a `levels`-deep decomposition.
pub fn min_length(levels: usize) -> usize {
    TAPS << levels
}

/// Raw multilevel coefficients. `details[0]` is the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    /// Signal length entering each level; `lengths[0]` is the input length.
    pub lengths: Vec<usize>,
}

/// Full-length band signals: `approx` is A_L, `details[j-1]` is D_j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletBands {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub filter: String,
    pub levels: usize,
}

impl WaveletBands {
    pub fn len(&self) -> usize {
        self.approx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.approx.is_empty()
    }

    /// Band values at time `t` in feature order `[A_L, D_1, ..., D_L]`.
    pub fn row(&self, t: usize) -> Vec<f64> {
        std::iter::once(self.approx[t])
            .chain(self.details.iter().map(|d| d[t]))
            .collect()
    }

    /// Column names in feature order, e.g. `a5,d1,...,d5`.
    pub fn names(&self) -> Vec<String> {
        std::iter::once(format!("a{}", self.levels))
            .chain((1..=self.levels).map(|j| format!("d{j}")))
            .collect()
    }

    /// Sum of all bands.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.approx.clone();
        for d in &self.details {
            out.iter_mut().zip(d).for_each(|(o, v)| *o += v);
        }
        out
    }
}

#[inline]
fn symmetric_index(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

fn analysis_step(x: &[f64], h: &[f64; TAPS], g: &[f64; TAPS]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let m = (n + TAPS - 1) / 2;
    let mut a = vec![0.0; m];
    let mut d = vec![0.0; m];
    for k in 0..m {
        let centre = 2 * k as isize + 1;
        let (mut sa, mut sd) = (0.0, 0.0);
        for j in 0..TAPS {
            let v = x[symmetric_index(centre - j as isize, n)];
            sa += h[j] * v;
            sd += g[j] * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

/// Inverse of one analysis step. Either band may be absent (treated as zero).
fn synthesis_step(a: Option<&[f64]>, d: Option<&[f64]>, out_len: usize, h: &[f64; TAPS], g: &[f64; TAPS]) -> Vec<f64> {
    let m = a.or(d).map_or(0, |c| c.len());
    let mut x = vec![0.0; out_len];
    for k in 0..m {
        let (ak, dk) = (a.map_or(0.0, |c| c[k]), d.map_or(0.0, |c| c[k]));
        // x[n] += a[k] h[2k+1-n] + d[k] g[2k+1-n], with 0 <= 2k+1-n < TAPS
        let top = 2 * k + 1;
        let lo = top.saturating_sub(TAPS - 1);
        let hi = top.min(out_len.saturating_sub(1));
        if out_len == 0 || lo > hi {
            continue;
        }
        for (n, xn) in x.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let j = top - n;
            *xn += ak * h[j] + dk * g[j];
        }
    }
    x
}

/// Multilevel analysis.
pub fn wavedec(x: &[f64], levels: usize) -> Result<Coefficients> {
    if levels == 0 {
        return Err(Error::domain("wavelet decomposition needs at least one level"));
    }
    if x.len() < min_length(levels) {
        return Err(Error::size(format!(
            "{}-level db4 decomposition needs at least {} samples, got {}",
            levels,
            min_length(levels),
            x.len()
        )));
    }
    let g = db4_highpass();
    let mut lengths = Vec::with_capacity(levels);
    let mut details = Vec::with_capacity(levels);
    let mut approx = x.to_vec();
    for _ in 0..levels {
        lengths.push(approx.len());
        let (a, d) = analysis_step(&approx, &DB4_LOWPASS, &g);
        details.push(d);
        approx = a;
    }
    Ok(Coefficients {
        approx,
        details,
        lengths,
    })
}

/// Multilevel synthesis; exact inverse of [`wavedec`].
pub fn waverec(c: &Coefficients) -> Vec<f64> {
    let g = db4_highpass();
    let mut a = c.approx.clone();
    for level in (0..c.details.len()).rev() {
        a = synthesis_step(Some(&a), Some(&c.details[level]), c.lengths[level], &DB4_LOWPASS, &g);
    }
    a
}

/// Reconstructs a single level's contribution: the approximation when
/// `level` is `None`, otherwise detail `level` (0 = finest), with every
/// other coefficient set to zero.
fn band(c: &Coefficients, level: Option<usize>) -> Vec<f64> {
    let g = db4_highpass();
    let top = c.details.len();
    let (mut x, start) = match level {
        None => (
            synthesis_step(Some(&c.approx), None, c.lengths[top - 1], &DB4_LOWPASS, &g),
            top - 1,
        ),
        Some(l) => (
            synthesis_step(None, Some(&c.details[l]), c.lengths[l], &DB4_LOWPASS, &g),
            l,
        ),
    };
    for l in (0..start).rev() {
        x = synthesis_step(Some(&x), None, c.lengths[l], &DB4_LOWPASS, &g);
    }
    x
}

/// Decomposes `x` into `levels + 1` time-aligned bands whose sum is `x`.
pub fn dwt_decompose(x: &[f64], levels: usize) -> Result<WaveletBands> {
    let c = wavedec(x, levels)?;
    let approx = band(&c, None);
    let details = (0..levels).map(|l| band(&c, Some(l))).collect();
    Ok(WaveletBands {
        approx,
        details,
        filter: "db4".into(),
        levels,
    })
}
