use num_complex::Complex64;

use crate::dsp;
use crate::error::{Error, Result};

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Average power in dBm of a sinusoid with peak amplitude `amplitude`.
pub fn amplitude_to_dbm(amplitude: f64, ref_impedance: f64) -> f64 {
    watts_to_dbm(amplitude * amplitude / 2.0 / ref_impedance)
}

/// Peak amplitude of a sinusoid carrying `dbm` average power.
pub fn dbm_to_amplitude(dbm: f64, ref_impedance: f64) -> f64 {
    (2.0 * ref_impedance * dbm_to_watts(dbm)).sqrt()
}

/// Average power of a real record, in dBm.
pub fn mean_power_dbm(samples: &[f64], ref_impedance: f64) -> f64 {
    let ms = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
    watts_to_dbm(ms / ref_impedance)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PaprConvention {
    /// Peak over mean of the analytic-signal envelope.
    #[default]
    Envelope,
    /// Peak over mean of the raw real samples squared.
    RawSamples,
}

/// PAPR of a complex envelope in dB.
pub fn papr_complex_db(samples: &[Complex64]) -> Result<f64> {
    let powers: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    ratio_db(&powers)
}

/// PAPR of a real passband record in dB.
pub fn papr_real_db(samples: &[f64], convention: PaprConvention) -> Result<f64> {
    match convention {
        PaprConvention::Envelope => papr_complex_db(&dsp::analytic_signal(samples)),
        PaprConvention::RawSamples => {
            let powers: Vec<f64> = samples.iter().map(|x| x * x).collect();
            ratio_db(&powers)
        }
    }
}

fn ratio_db(powers: &[f64]) -> Result<f64> {
    if powers.is_empty() {
        return Err(Error::ZeroPower);
    }
    let mean = powers.iter().sum::<f64>() / powers.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::ZeroPower);
    }
    let peak = powers.iter().cloned().fold(f64::MIN, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn complex_exponential_is_flat() {
        let x: Vec<Complex64> = (0..100)
            .map(|n| Complex64::from_polar(2.0, 0.1 * n as f64))
            .collect();
        assert!(papr_complex_db(&x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cosine_conventions() {
        let x: Vec<f64> = (0..256)
            .map(|n| (2.0 * PI * 8.0 * n as f64 / 256.0).cos())
            .collect();
        assert!(papr_real_db(&x, PaprConvention::Envelope).unwrap().abs() < 1e-9);
        let raw = papr_real_db(&x, PaprConvention::RawSamples).unwrap();
        assert!((raw - 10.0 * 2f64.log10()).abs() < 1e-9);
        assert!((raw - 3.01).abs() < 0.01);
    }

    #[test]
    fn zero_power_rejected() {
        assert!(matches!(
            papr_complex_db(&[Complex64::new(0.0, 0.0); 4]),
            Err(Error::ZeroPower)
        ));
        assert!(matches!(papr_complex_db(&[]), Err(Error::ZeroPower)));
    }

    #[test]
    fn dbm_conventions() {
        assert!((amplitude_to_dbm(1.0, 50.0) - 10.0).abs() < 1e-12);
        assert!((dbm_to_amplitude(10.0, 50.0) - 1.0).abs() < 1e-12);
        assert!((dbm_to_amplitude(0.0, 50.0) - 0.1f64.sqrt()).abs() < 1e-12);
    }
}
