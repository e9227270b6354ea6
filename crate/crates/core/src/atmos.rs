//! Hub-height extrapolation, turbine power curve and ramp-event labelling.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data_io::{create, WindSeries};
use crate::error::{Error, Result};

/// Turbine geometry and power-curve constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    pub rotor_diameter: f64,
    pub hub_height: f64,
    pub rated_speed: f64,
    pub cut_in: f64,
    pub cut_out: f64,
    pub air_density: f64,
    pub cp: f64,
}

impl Default for TurbineSpec {
    /// 120 m rotor on a 90 m hub, rated at 12 m/s.
    fn default() -> Self {
        Self {
            rotor_diameter: 120.0,
            hub_height: 90.0,
            rated_speed: 12.0,
            cut_in: 3.0,
            cut_out: 25.0,
            air_density: 1.225,
            cp: 0.45,
        }
    }
}

impl TurbineSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.cut_in >= 0.0
            && self.cut_in < self.rated_speed
            && self.rated_speed < self.cut_out
            && self.rotor_diameter > 0.0
            && self.hub_height > 0.0
            && self.air_density > 0.0
            && self.cp > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "invalid turbine: need 0 <= cut_in < rated < cut_out and positive geometry, got {self:?}"
            )))
        }
    }

    pub fn swept_area(&self) -> f64 {
        let r = self.rotor_diameter / 2.0;
        PI * r * r
    }

    /// Output at rated speed: ½·ρ·A·cp·v_rated³ (W).
    pub fn nominal_power(&self) -> f64 {
        self.aero_power(self.rated_speed)
    }

    fn aero_power(&self, v: f64) -> f64 {
        0.5 * self.air_density * self.swept_area() * self.cp * v * v * v
    }
}

/// Scales a series from its measurement height to `target_height` with the
/// neutral logarithmic wind profile `v(z) ∝ ln(z / z0)`.
pub fn log_law_transform(s: &WindSeries, z0: f64, target_height: f64) -> Result<WindSeries> {
    let factor = log_law_factor(s.height(), z0, target_height)?;
    let values = s.values().iter().map(|v| v * factor).collect();
    s.map_values(target_height, values)
}

/// Ratio `ln(to / z0) / ln(from / z0)`.
pub fn log_law_factor(from_height: f64, z0: f64, to_height: f64) -> Result<f64> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(Error::domain(format!("roughness length must be positive, got {z0}")));
    }
    if !(from_height > z0) || !(to_height > z0) {
        return Err(Error::domain(format!(
            "heights must exceed the roughness length {z0} m (got {from_height} m and {to_height} m)"
        )));
    }
    Ok((to_height / z0).ln() / (from_height / z0).ln())
}

/// Piecewise power curve: zero below cut-in and from cut-out, cubic
/// ½ρA·cp·v³ up to rated, flat at nominal power between rated and cut-out.
pub fn power_curve(v: f64, t: &TurbineSpec) -> f64 {
    if !(v >= t.cut_in) || v >= t.cut_out {
        0.0
    } else if v < t.rated_speed {
        t.aero_power(v)
    } else {
        t.nominal_power()
    }
}

pub fn power_series(speeds: &[f64], t: &TurbineSpec) -> Vec<f64> {
    speeds.iter().map(|&v| power_curve(v, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampDirection {
    Up,
    Down,
}

impl RampDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            RampDirection::Up => "up",
            RampDirection::Down => "down",
        }
    }
}

/// A power change between consecutive samples beyond the ramp threshold.
///
/// `index` is the later sample of the pair, so the change is
/// `p[index] - p[index - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampEvent {
    pub index: usize,
    pub direction: RampDirection,
    pub magnitude: f64,
}

/// Flags every step whose power change reaches `±threshold_frac · P_nom`.
/// Changes exactly at the threshold count as events.
pub fn detect_ramps(p: &[f64], threshold_frac: f64, t: &TurbineSpec) -> Result<Vec<RampEvent>> {
    if !(threshold_frac > 0.0 && threshold_frac < 1.0) {
        return Err(Error::domain(format!("ramp threshold fraction must lie in (0, 1), got {threshold_frac}")));
    }
    if p.len() < 2 {
        return Err(Error::size(format!("ramp detection needs at least 2 samples, got {}", p.len())));
    }
    Ok(detect_ramps_abs(p, threshold_frac * t.nominal_power()))
}

/// Ramp detection against an absolute power threshold (W).
pub fn detect_ramps_abs(p: &[f64], threshold: f64) -> Vec<RampEvent> {
    p.windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let delta = w[1] - w[0];
            let direction = if delta >= threshold {
                RampDirection::Up
            } else if delta <= -threshold {
                RampDirection::Down
            } else {
                return None;
            };
            Some(RampEvent {
                index: i + 1,
                direction,
                magnitude: delta,
            })
        })
        .collect()
}

/// First differences `p[t+1] - p[t]`.
pub fn ramp_signal(p: &[f64]) -> Vec<f64> {
    p.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Writes events as `index,direction,magnitude_w`.
pub fn export_ramps(events: &[RampEvent], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "index,direction,magnitude_w")?;
        for e in events {
            writeln!(out, "{},{},{}", e.index, e.direction.as_str(), e.magnitude)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
