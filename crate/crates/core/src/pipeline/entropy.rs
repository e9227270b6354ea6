use serde::{Deserialize, Serialize};

use crate::atmos::{power_series, ramp_signal, TurbineSpec};
use crate::error::{Error, Result};
use crate::sigproc::{dwt_decompose, emd_decompose, log_energy_entropy};

pub const ENTROPY_WAVELET_LEVELS: usize = 5;
pub const ENTROPY_MAX_IMFS: usize = 5;
pub const MIN_ENTROPY_LENGTH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    /// Log energy entropy of the A5 band of the ramp signal.
    pub wt_entropy: f64,
    /// Log energy entropy of the EMD residue plus the slowest IMF.
    pub emd_entropy: f64,
    pub n_imfs: usize,
}

/// Converts speeds (m/s) to power (W), forms the one-step ramp signal ΔP and
/// compares the randomness of its low-frequency parts.
pub fn entropy_analysis(predicted_speed: &[f64], turbine: &TurbineSpec) -> Result<EntropyResult> {
    if predicted_speed.len() < MIN_ENTROPY_LENGTH {
        return Err(Error::size(format!(
            "entropy analysis needs at least {MIN_ENTROPY_LENGTH} samples, got {}",
            predicted_speed.len()
        )));
    }
    let speeds: Vec<f64> = predicted_speed.iter().map(|v| v.max(0.0)).collect();
    let ramp = ramp_signal(&power_series(&speeds, turbine));
    ramp_entropy(&ramp)
}

pub fn ramp_entropy(ramp: &[f64]) -> Result<EntropyResult> {
    let bands = dwt_decompose(ramp, ENTROPY_WAVELET_LEVELS)?;
    let emd = emd_decompose(ramp, ENTROPY_MAX_IMFS)?;
    Ok(EntropyResult {
        wt_entropy: log_energy_entropy(&bands.approx),
        emd_entropy: log_energy_entropy(&emd.low_frequency()),
        n_imfs: emd.imfs.len(),
    })
}
