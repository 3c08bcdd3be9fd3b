use num_complex::Complex64;

use super::power::watts_to_dbm;
use super::sampled::{grid_index, SampledSignal};
use super::DEFAULT_FLOOR_DBM;
use crate::dsp;
use crate::error::{Error, Result};

/// One-sided complex spectrum of a coherent record.
///
/// `bins[k]` is the peak amplitude phasor of the tone at `k * bin_step`
/// (DC and, for even records, the Nyquist bin hold the plain mean value).
/// A tone `A cos(2 pi f t + phi)` on the grid shows up as `A e^{j phi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    bin_step: f64,
    record_len: usize,
    ref_impedance: f64,
    floor_dbm: f64,
    bins: Vec<Complex64>,
    power_dbm: Vec<f64>,
}

impl Spectrum {
    pub fn from_bins(
        bin_step: f64,
        record_len: usize,
        bins: Vec<Complex64>,
        ref_impedance: f64,
        floor_dbm: f64,
    ) -> Result<Self> {
        if bins.len() != record_len / 2 + 1 {
            return Err(Error::InvalidConfig(format!(
                "{} bins do not match a {record_len}-sample record",
                bins.len()
            )));
        }
        if !(bin_step > 0.0 && ref_impedance > 0.0) {
            return Err(Error::InvalidConfig(
                "bin step and reference impedance must be positive".into(),
            ));
        }
        let mut spec = Self {
            bin_step,
            record_len,
            ref_impedance,
            floor_dbm,
            bins,
            power_dbm: Vec::new(),
        };
        spec.power_dbm = (0..spec.bins.len())
            .map(|k| spec.bin_dbm(k, spec.bins[k]))
            .collect();
        Ok(spec)
    }

    pub fn bin_step(&self) -> f64 {
        self.bin_step
    }

    pub fn record_len(&self) -> usize {
        self.record_len
    }

    pub fn sample_rate(&self) -> f64 {
        self.bin_step * self.record_len as f64
    }

    pub fn ref_impedance(&self) -> f64 {
        self.ref_impedance
    }

    pub fn floor_dbm(&self) -> f64 {
        self.floor_dbm
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn power_dbm(&self) -> &[f64] {
        &self.power_dbm
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.bin_step
    }

    pub fn bin_index(&self, frequency: f64) -> Result<usize> {
        match grid_index(frequency, self.bin_step) {
            Some(k) if k < self.bins.len() => Ok(k),
            Some(_) => Err(Error::Undersampled {
                frequency,
                sample_rate: self.sample_rate(),
            }),
            None => Err(Error::NonCommensurate {
                frequency,
                bin_step: self.bin_step,
            }),
        }
    }

    fn is_single_sided_edge(&self, k: usize) -> bool {
        k == 0 || (self.record_len % 2 == 0 && k == self.record_len / 2)
    }

    /// Average power carried by bin `k` with phasor `value`, in watts.
    pub fn bin_watts(&self, k: usize, value: Complex64) -> f64 {
        let m2 = value.norm_sqr();
        if self.is_single_sided_edge(k) {
            m2 / self.ref_impedance
        } else {
            m2 / 2.0 / self.ref_impedance
        }
    }

    /// dBm of an arbitrary phasor placed at bin `k`, clamped at the floor.
    pub fn bin_dbm(&self, k: usize, value: Complex64) -> f64 {
        let w = self.bin_watts(k, value);
        if w > 0.0 {
            watts_to_dbm(w).max(self.floor_dbm)
        } else {
            self.floor_dbm
        }
    }

    /// Same grid, new phasors.
    pub fn with_bins(&self, bins: Vec<Complex64>) -> Result<Self> {
        Self::from_bins(
            self.bin_step,
            self.record_len,
            bins,
            self.ref_impedance,
            self.floor_dbm,
        )
    }

    /// Rotate selected bins by the given angles. The power view is carried
    /// over untouched, so it stays exactly equal to the input's.
    pub fn rotated(&self, rotations: &[(usize, f64)]) -> Result<Self> {
        let mut out = self.clone();
        for &(k, angle) in rotations {
            let b = out.bins.get_mut(k).ok_or(Error::InvalidConfig(format!(
                "bin {k} outside a {}-bin spectrum",
                self.bins.len()
            )))?;
            *b *= Complex64::from_polar(1.0, angle);
        }
        Ok(out)
    }

    pub fn same_grid(&self, other: &Spectrum) -> bool {
        self.record_len == other.record_len && self.bin_step == other.bin_step
    }

    /// Real time record reproducing this spectrum.
    pub fn to_signal(&self) -> Result<SampledSignal> {
        let n = self.record_len;
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        for (k, &b) in self.bins.iter().enumerate() {
            let v = if self.is_single_sided_edge(k) {
                b * n as f64
            } else {
                b * (n as f64 / 2.0)
            };
            full[k] = v;
            if k != 0 && !(n % 2 == 0 && k == n / 2) {
                full[n - k] = v.conj();
            }
        }
        let time = dsp::ifft_normalized(full);
        SampledSignal::new(self.sample_rate(), time.into_iter().map(|z| z.re).collect())
    }
}

/// One-sided peak-amplitude spectrum of `signal` with the default floor.
/// No window is applied: the record must be a coherent capture.
pub fn compute_spectrum(signal: &SampledSignal, ref_impedance: f64) -> Spectrum {
    compute_spectrum_with_floor(signal, ref_impedance, DEFAULT_FLOOR_DBM)
}

pub fn compute_spectrum_with_floor(
    signal: &SampledSignal,
    ref_impedance: f64,
    floor_dbm: f64,
) -> Spectrum {
    let n = signal.len();
    let full = dsp::fft_real(signal.samples());
    let half = n / 2;
    let bins = (0..=half)
        .map(|k| {
            if k == 0 || (n % 2 == 0 && k == half) {
                full[k] / n as f64
            } else {
                full[k] * (2.0 / n as f64)
            }
        })
        .collect();
    Spectrum::from_bins(signal.grid_base(), n, bins, ref_impedance, floor_dbm)
        .expect("bin count follows from the record length")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{synth_multitone, Port, Tone, ToneSet};
    use std::f64::consts::PI;

    fn tones(list: &[(f64, f64, f64)]) -> ToneSet {
        ToneSet::new(
            Port::If,
            list.iter()
                .map(|&(f, a, p)| Tone::new(f, a, p).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_volt_is_ten_dbm() {
        let s = synth_multitone(&tones(&[(1e9, 1.0, 0.0)]), 16e9, 160).unwrap();
        let spec = compute_spectrum(&s, 50.0);
        let k = spec.bin_index(1e9).unwrap();
        assert!((spec.power_dbm()[k] - 10.0).abs() < 1e-9);
        assert!((spec.bins()[k].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_signal_sits_on_floor() {
        let s = SampledSignal::zeros(1e9, 64).unwrap();
        let spec = compute_spectrum(&s, 50.0);
        assert!(spec.power_dbm().iter().all(|&p| p == -200.0));
        let spec = compute_spectrum_with_floor(&s, 50.0, -150.0);
        assert!(spec.power_dbm().iter().all(|&p| p == -150.0));
    }

    #[test]
    fn dc_uses_mean_as_rms() {
        let s = SampledSignal::new(1e3, vec![1.0; 10]).unwrap();
        let spec = compute_spectrum(&s, 50.0);
        assert!((spec.bins()[0].re - 1.0).abs() < 1e-15);
        assert!((spec.power_dbm()[0] - 10.0 * (1.0 / 50.0 / 1e-3f64).log10()).abs() < 1e-12);
    }

    #[test]
    fn phase_is_reported() {
        let s = synth_multitone(&tones(&[(2e9, 0.5, PI / 3.0)]), 16e9, 64).unwrap();
        let spec = compute_spectrum(&s, 50.0);
        let b = spec.bins()[spec.bin_index(2e9).unwrap()];
        assert!((b.arg() - PI / 3.0).abs() < 1e-12);
        assert!((b.norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let s = synth_multitone(&tones(&[(1e9, 0.2, 1.0), (3e9, 0.7, 2.0)]), 16e9, 96).unwrap();
        let s = s.map(|x| x + 0.1);
        let back = compute_spectrum(&s, 50.0).to_signal().unwrap();
        for (a, b) in s.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn bin_index_checks() {
        let s = SampledSignal::zeros(64e9, 12800).unwrap();
        let spec = compute_spectrum(&s, 50.0);
        assert_eq!(spec.bin_index(0.995e9).unwrap(), 199);
        assert!(matches!(
            spec.bin_index(1.0001e9),
            Err(Error::NonCommensurate { .. })
        ));
        assert!(matches!(
            spec.bin_index(40e9),
            Err(Error::Undersampled { .. })
        ));
    }
}
