use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersistenceMode {
    /// ŝ(t+1) = s(t)
    Last,
    /// ŝ(t+1) = s(t) + (s(t) − s(t−1))
    #[default]
    TwoWindow,
    /// ŝ(t+1) = (s(t) + s(t−1)) / 2
    MeanOfTwo,
}

impl PersistenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PersistenceMode::Last => "last",
            PersistenceMode::TwoWindow => "two_window",
            PersistenceMode::MeanOfTwo => "mean_of_two",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "last" => Ok(PersistenceMode::Last),
            "two_window" => Ok(PersistenceMode::TwoWindow),
            "mean_of_two" => Ok(PersistenceMode::MeanOfTwo),
            other => Err(Error::Config(format!("unknown persistence mode '{other}'"))),
        }
    }
}

/// `out[t]` is the forecast of s(t+1) issued at t. At t = 0 only one window
/// exists and every mode falls back to s(0).
pub fn persistence_forecast(s: &[f64], mode: PersistenceMode) -> Result<Vec<f64>> {
    if s.len() < 2 {
        return Err(Error::size(format!(
            "persistence needs at least 2 samples, got {}",
            s.len()
        )));
    }
    Ok((0..s.len())
        .map(|t| match (mode, t) {
            (PersistenceMode::Last, _) | (_, 0) => s[t],
            (PersistenceMode::TwoWindow, _) => 2.0 * s[t] - s[t - 1],
            (PersistenceMode::MeanOfTwo, _) => 0.5 * (s[t] + s[t - 1]),
        })
        .collect())
}
