//! Forecast error metrics, ramp-magnitude errors and timing.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::atmos::{RampDirection, RampEvent};
use crate::data_io::create;
use crate::error::{Error, Result};

/// Denominator of Theil's U2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum U2Form {
    /// Σ((s_{i+1} − ŝ_i)/s_i)², with the forecast in the reference term.
    #[default]
    AsPrinted,
    /// Σ((s_{i+1} − s_i)/s_i)², the naive no-change reference.
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    /// `None` when the actual series has zero variance.
    pub nmse: Option<f64>,
    /// Σ(ŝ − s̄)² / Σ(s − s̄)², unclamped. `None` on zero variance.
    pub r2: Option<f64>,
    pub u1: f64,
    /// `None` when some s_i in the shifted range is zero or the reference
    /// term vanishes.
    pub u2: Option<f64>,
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::shape(format!(
            "{} actual values but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(Error::size("metrics need at least one sample"));
    }
    Ok(())
}

pub fn metrics(actual: &[f64], predicted: &[f64]) -> Result<Metrics> {
    metrics_with(actual, predicted, U2Form::AsPrinted)
}

pub fn metrics_with(actual: &[f64], predicted: &[f64], form: U2Form) -> Result<Metrics> {
    check_pair(actual, predicted)?;
    let n = actual.len() as f64;
    let mean = actual.iter().sum::<f64>() / n;
    let sse: f64 = actual.iter().zip(predicted).map(|(s, p)| (p - s) * (p - s)).sum();
    let sst: f64 = actual.iter().map(|s| (s - mean) * (s - mean)).sum();
    let ssr: f64 = predicted.iter().map(|p| (p - mean) * (p - mean)).sum();
    let rmse = (sse / n).sqrt();
    let (nmse, r2) = if sst > 0.0 {
        (Some(sse / sst), Some(ssr / sst))
    } else {
        (None, None)
    };
    Ok(Metrics {
        rmse,
        nmse,
        r2,
        u1: theil_u1(actual, predicted)?,
        u2: theil_u2(actual, predicted, form).ok(),
    })
}

pub fn theil_u1(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let n = actual.len() as f64;
    let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    let num = (actual.iter().zip(predicted).map(|(s, p)| (p - s) * (p - s)).sum::<f64>() / n).sqrt();
    let den = rms(actual) + rms(predicted);
    Ok(if den > 0.0 { (num / den).min(1.0) } else { 0.0 })
}

pub fn theil_u2(actual: &[f64], predicted: &[f64], form: U2Form) -> Result<f64> {
    check_pair(actual, predicted)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..actual.len() - 1 {
        let s = actual[i];
        if s == 0.0 {
            return Err(Error::domain(format!("U2 undefined: actual value at {i} is zero")));
        }
        let reference = match form {
            U2Form::AsPrinted => predicted[i],
            U2Form::Conventional => s,
        };
        num += ((actual[i + 1] - predicted[i + 1]) / s).powi(2);
        den += ((actual[i + 1] - reference) / s).powi(2);
    }
    if den > 0.0 {
        Ok((num / den).sqrt())
    } else {
        Err(Error::domain("U2 undefined: reference error is zero"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RampErrors {
    pub r_up: Option<f64>,
    pub r_down: Option<f64>,
}

/// Mean of |ΔP̂ − ΔP| / p_nom over the up events and over the down events,
/// where Δ is the one-step difference ending at the event index.
pub fn ramp_errors(
    actual_power: &[f64],
    predicted_power: &[f64],
    events: &[RampEvent],
    p_nom: f64,
) -> Result<RampErrors> {
    check_pair(actual_power, predicted_power)?;
    if !(p_nom > 0.0) {
        return Err(Error::domain(format!("nominal power must be positive, got {p_nom}")));
    }
    let len = actual_power.len();
    let (mut up, mut n_up, mut down, mut n_down) = (0.0, 0usize, 0.0, 0usize);
    for e in events {
        if e.index == 0 || e.index >= len {
            return Err(Error::Index { index: e.index, len });
        }
        let i = e.index;
        let dp = actual_power[i] - actual_power[i - 1];
        let dp_hat = predicted_power[i] - predicted_power[i - 1];
        let err = (dp_hat - dp).abs() / p_nom;
        match e.direction {
            RampDirection::Up => {
                up += err;
                n_up += 1;
            }
            RampDirection::Down => {
                down += err;
                n_down += 1;
            }
        }
    }
    Ok(RampErrors {
        r_up: (n_up > 0).then(|| up / n_up as f64),
        r_down: (n_down > 0).then(|| down / n_down as f64),
    })
}

/// Runs `f` and returns its result with the elapsed monotonic-clock seconds.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model_id: String,
    pub rmse: Option<f64>,
    pub nmse: Option<f64>,
    pub r2: Option<f64>,
    pub u1: Option<f64>,
    pub u2: Option<f64>,
    pub r_up: Option<f64>,
    pub r_down: Option<f64>,
    pub cpu_time: Option<f64>,
    /// "ok", or "error: <message>" when the model failed.
    pub status: String,
    pub notes: Vec<String>,
}

impl EvaluationReport {
    pub fn new(model_id: &str, m: &Metrics, ramps: &RampErrors, cpu_time: f64) -> Self {
        let mut notes = Vec::new();
        if ramps.r_up.is_none() {
            notes.push("no up events in test window".to_string());
        }
        if ramps.r_down.is_none() {
            notes.push("no down events in test window".to_string());
        }
        Self {
            model_id: model_id.to_string(),
            rmse: Some(m.rmse),
            nmse: m.nmse,
            r2: m.r2,
            u1: Some(m.u1),
            u2: m.u2,
            r_up: ramps.r_up,
            r_down: ramps.r_down,
            cpu_time: Some(cpu_time),
            status: "ok".into(),
            notes,
        }
    }

    pub fn failed(model_id: &str, err: &Error) -> Self {
        Self {
            model_id: model_id.to_string(),
            rmse: None,
            nmse: None,
            r2: None,
            u1: None,
            u2: None,
            r_up: None,
            r_down: None,
            cpu_time: None,
            status: format!("error: {err}"),
            notes: Vec::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Metric columns in table order: RMSE, NMSE, R², U1, U2, R^up, R^down, CPU time.
    pub fn columns(&self) -> [Option<f64>; 8] {
        [
            self.rmse,
            self.nmse,
            self.r2,
            self.u1,
            self.u2,
            self.r_up,
            self.r_down,
            self.cpu_time,
        ]
    }
}

pub const TABLE_HEADER: [&str; 9] = ["model", "rmse", "nmse", "r2", "u1", "u2", "r_up", "r_down", "cpu_time"];

/// Shortest round-trip representation, or `NA`.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

/// Writes every column except CPU time, which varies from run to run.
pub fn write_report_csv(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&TABLE_HEADER[..8].join(","));
    out.push_str(",status,notes\n");
    for r in reports {
        let cols = r.columns();
        let vals: Vec<String> = cols[..7].iter().map(|v| fmt_opt(*v)).collect();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.model_id,
            vals.join(","),
            csv_field(&r.status),
            csv_field(&r.notes.join("; "))
        );
    }
    write_text(path, &out)
}

pub fn write_timing_csv(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let mut out = String::from("model,cpu_time\n");
    for r in reports {
        let _ = writeln!(out, "{},{}", r.model_id, fmt_opt(r.cpu_time));
    }
    write_text(path, &out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    use std::io::Write;
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Fixed-width table with all columns including CPU time.
pub fn render_table(reports: &[EvaluationReport]) -> String {
    let mut out = format!(
        "{:<12} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}\n",
        "Model", "RMSE", "NMSE", "R2", "U1", "U2", "R_up", "R_down", "CPU(s)"
    );
    for r in reports {
        let _ = write!(out, "{:<12}", r.model_id);
        for v in r.columns() {
            let cell = v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"));
            let _ = write!(out, " {cell:>10}");
        }
        if !r.is_ok() {
            let _ = write!(out, "  {}", r.status);
        }
        out.push('\n');
    }
    out
}
