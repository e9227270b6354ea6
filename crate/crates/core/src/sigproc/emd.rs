//! Empirical mode decomposition by cubic-spline envelope sifting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_EMD_LENGTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmdConfig {
    pub max_imfs: usize,
    /// Sifting stops once the Cauchy-type criterion Σm²/Σh² falls below this
    /// and the candidate satisfies the IMF counting property.
    pub sd_threshold: f64,
    pub max_sift_iterations: usize,
    /// Decomposition stops when the residue energy drops below this
    /// fraction of the input energy.
    pub residue_energy_floor: f64,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            max_imfs: 5,
            sd_threshold: 0.2,
            max_sift_iterations: 50,
            residue_energy_floor: 1e-20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmdResult {
    pub imfs: Vec<Vec<f64>>,
    pub residue: Vec<f64>,
}

impl EmdResult {
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        for imf in &self.imfs {
            out.iter_mut().zip(imf).for_each(|(o, v)| *o += v);
        }
        out
    }

    /// Residue plus the slowest IMF (the residue alone when no IMF was extracted).
    pub fn low_frequency(&self) -> Vec<f64> {
        let mut out = self.residue.clone();
        if let Some(last) = self.imfs.last() {
            out.iter_mut().zip(last).for_each(|(o, v)| *o += v);
        }
        out
    }
}

pub fn emd_decompose(x: &[f64], max_imfs: usize) -> Result<EmdResult> {
    emd_decompose_with(
        x,
        &EmdConfig {
            max_imfs,
            ..EmdConfig::default()
        },
    )
}

pub fn emd_decompose_with(x: &[f64], cfg: &EmdConfig) -> Result<EmdResult> {
    if x.len() < MIN_EMD_LENGTH {
        return Err(Error::size(format!(
            "EMD needs at least {MIN_EMD_LENGTH} samples, got {}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("EMD input contains non-finite values"));
    }
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let mut residue = x.to_vec();
    let mut imfs = Vec::new();
    while imfs.len() < cfg.max_imfs {
        let r_energy: f64 = residue.iter().map(|v| v * v).sum();
        if r_energy <= cfg.residue_energy_floor * energy {
            break;
        }
        let (maxima, minima) = extrema(&residue);
        if maxima.is_empty() || minima.is_empty() {
            break;
        }
        let imf = sift(&residue, cfg);
        residue.iter_mut().zip(&imf).for_each(|(r, v)| *r -= v);
        imfs.push(imf);
    }
    Ok(EmdResult { imfs, residue })
}

fn sift(r: &[f64], cfg: &EmdConfig) -> Vec<f64> {
    let mut h = r.to_vec();
    for _ in 0..cfg.max_sift_iterations {
        let Some(mean) = envelope_mean(&h) else { break };
        let h_energy: f64 = h.iter().map(|v| v * v).sum();
        let m_energy: f64 = mean.iter().map(|v| v * v).sum();
        h.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
        let sd = if h_energy > 0.0 { m_energy / h_energy } else { 0.0 };
        if sd < cfg.sd_threshold && is_imf(&h) {
            break;
        }
    }
    h
}

/// Mean of the upper and lower spline envelopes, or `None` when `h` lacks
/// either maxima or minima.
fn envelope_mean(h: &[f64]) -> Option<Vec<f64>> {
    let (maxima, minima) = extrema(h);
    if maxima.is_empty() || minima.is_empty() {
        return None;
    }
    let upper = envelope(h, &maxima);
    let lower = envelope(h, &minima);
    Some(upper.iter().zip(&lower).map(|(u, l)| 0.5 * (u + l)).collect())
}

/// Spline through the given extrema, with the two outermost extrema at each
/// end mirrored about the first and last samples.
fn envelope(h: &[f64], idx: &[usize]) -> Vec<f64> {
    let n = h.len();
    let last = (n - 1) as f64;
    let mut knots: Vec<(f64, f64)> = Vec::with_capacity(idx.len() + 4);
    for &i in idx.iter().take(2).rev() {
        if i > 0 {
            knots.push((-(i as f64), h[i]));
        }
    }
    knots.extend(idx.iter().map(|&i| (i as f64, h[i])));
    for &i in idx.iter().rev().take(2).rev() {
        if i < n - 1 {
            knots.push((2.0 * last - i as f64, h[i]));
        }
    }
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    knots.dedup_by(|a, b| a.0 == b.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = knots.into_iter().unzip();
    NaturalSpline::new(&xs, &ys).eval_grid(n)
}

/// Indices of local maxima and minima. On a plateau only its first sample
/// is reported.
pub fn extrema(h: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for i in 1..h.len().saturating_sub(1) {
        let (p, c, nx) = (h[i - 1], h[i], h[i + 1]);
        if p < c && c >= nx {
            // a plateau only counts if it eventually falls
            if c > nx || falls_after(h, i) {
                maxima.push(i);
            }
        } else if p > c && c <= nx && (c < nx || rises_after(h, i)) {
            minima.push(i);
        }
    }
    (maxima, minima)
}

fn falls_after(h: &[f64], i: usize) -> bool {
    h[i..].iter().find(|&&v| v != h[i]).is_some_and(|&v| v < h[i])
}

fn rises_after(h: &[f64], i: usize) -> bool {
    h[i..].iter().find(|&&v| v != h[i]).is_some_and(|&v| v > h[i])
}

/// Sign changes, ignoring exact zeros.
pub fn zero_crossings(h: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = 0.0f64;
    for &v in h.iter().filter(|v| **v != 0.0) {
        if prev != 0.0 && (prev < 0.0) != (v < 0.0) {
            count += 1;
        }
        prev = v;
    }
    count
}

/// Extrema count and zero-crossing count differ by at most one.
pub fn is_imf(h: &[f64]) -> bool {
    let (maxima, minima) = extrema(h);
    let ext = maxima.len() + minima.len();
    ext.abs_diff(zero_crossings(h)) <= 1
}

/// Natural cubic spline (zero second derivative at both ends).
struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        let mut m = vec![0.0; n];
        if n >= 3 {
            // tridiagonal system for interior second derivatives
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            // Thomas algorithm; sub-diagonal entry i equals h_i = upper[i-1]
            for i in 1..k {
                let w = upper[i - 1] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        }
    }

    fn eval_segment(&self, seg: usize, t: f64) -> f64 {
        let (x0, x1) = (self.xs[seg], self.xs[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        a * self.ys[seg]
            + b * self.ys[seg + 1]
            + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / 6.0
    }

    /// Evaluates at 0, 1, ..., n-1 (extrapolating linearly in the cubic of
    /// the outer segments when the grid extends beyond the knots).
    fn eval_grid(&self, n: usize) -> Vec<f64> {
        if self.xs.len() == 1 {
            return vec![self.ys[0]; n];
        }
        let segs = self.xs.len() - 1;
        let mut seg = 0;
        (0..n)
            .map(|i| {
                let t = i as f64;
                while seg + 1 < segs && t > self.xs[seg + 1] {
                    seg += 1;
                }
                self.eval_segment(seg, t)
            })
            .collect()
    }
}
