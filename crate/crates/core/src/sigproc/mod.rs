//! Wavelet and empirical-mode decompositions plus log energy entropy.

pub mod dwt;
pub mod emd;

pub use dwt::{dwt_decompose, WaveletBands};
pub use emd::{emd_decompose, EmdResult};

/// Floor applied to h(t)² before taking the logarithm.
pub const ENTROPY_FLOOR: f64 = 1e-12;

/// Σ ln(max(h(t)², 1e-12)).
pub fn log_energy_entropy(h: &[f64]) -> f64 {
    h.iter().map(|v| (v * v).max(ENTROPY_FLOOR).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    #[test]
    fn hand_cases() {
        assert_eq!(log_energy_entropy(&[1.0, 1.0, 1.0]), 0.0);
        assert!((log_energy_entropy(&[E, 1.0]) - 2.0).abs() < 1e-12);
        assert!((log_energy_entropy(&[0.0]) - (-27.631_021_115_928_547)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn sign_invariant(h in prop::collection::vec(-1e3f64..1e3, 1..64)) {
            let neg: Vec<f64> = h.iter().map(|v| -v).collect();
            prop_assert_eq!(log_energy_entropy(&h), log_energy_entropy(&neg));
        }

        #[test]
        fn additive_over_concatenation(
            a in prop::collection::vec(-1e3f64..1e3, 1..32),
            b in prop::collection::vec(-1e3f64..1e3, 1..32),
        ) {
            let joined: Vec<f64> = a.iter().chain(&b).copied().collect();
            let sum = log_energy_entropy(&a) + log_energy_entropy(&b);
            prop_assert!((log_energy_entropy(&joined) - sum).abs() <= 1e-9 * (1.0 + sum.abs()));
        }

        #[test]
        fn scaling_shifts_by_n_ln_a2(
            h in prop::collection::vec(0.01f64..1e2, 1..32),
            a in 0.1f64..10.0,
        ) {
            let scaled: Vec<f64> = h.iter().map(|v| a * v).collect();
            let expect = log_energy_entropy(&h) + h.len() as f64 * (a * a).ln();
            prop_assert!((log_energy_entropy(&scaled) - expect).abs() <= 1e-9 * (1.0 + expect.abs()));
        }
    }
}
