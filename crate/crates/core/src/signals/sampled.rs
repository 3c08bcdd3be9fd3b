use std::f64::consts::TAU;

use super::tone::ToneSet;
use crate::error::{Error, Result};

/// Relative tolerance, in bins, for deciding that a frequency is on the grid.
const GRID_TOLERANCE: f64 = 1e-6;

/// Uniformly sampled real record. The record is treated as one period of a
/// periodic signal, so its DFT bins sit at multiples of `grid_base`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    sample_rate: f64,
    samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(sample_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidConfig(
                "sampled signal needs at least 2 samples".into(),
            ));
        }
        Ok(Self {
            sample_rate,
            samples,
        })
    }

    pub fn zeros(sample_rate: f64, len: usize) -> Result<Self> {
        Self::new(sample_rate, vec![0.0; len])
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Frequency resolution `sample_rate / len`.
    pub fn grid_base(&self) -> f64 {
        self.sample_rate / self.samples.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            sample_rate: self.sample_rate,
            samples: self.samples.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        self.map(|x| k * x)
    }

    pub fn check_compatible(&self, other: &SampledSignal) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        if self.sample_rate != other.sample_rate {
            return Err(Error::RateMismatch(self.sample_rate, other.sample_rate));
        }
        Ok(())
    }

    /// Sample-wise `a*self + b*other`.
    pub fn combine(&self, a: f64, other: &SampledSignal, b: f64) -> Result<Self> {
        self.check_compatible(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self {
            sample_rate: self.sample_rate,
            samples,
        })
    }
}

/// Bin index of `frequency` on a grid of step `bin_step`, if it lands on one.
pub fn grid_index(frequency: f64, bin_step: f64) -> Option<usize> {
    let k = frequency / bin_step;
    let r = k.round();
    if r >= 0.0 && (k - r).abs() <= GRID_TOLERANCE {
        Some(r as usize)
    } else {
        None
    }
}

pub(crate) fn require_grid_index(frequency: f64, bin_step: f64) -> Result<usize> {
    grid_index(frequency, bin_step).ok_or(Error::NonCommensurate {
        frequency,
        bin_step,
    })
}

/// Samples of `sum_i A_i cos(2 pi f_i n / fs + phi_i)`. Every tone must sit
/// on the `sample_rate / length` grid and below Nyquist.
pub fn synth_multitone(tones: &ToneSet, sample_rate: f64, length: usize) -> Result<SampledSignal> {
    if length < 2 {
        return Err(Error::InvalidConfig(
            "record length must be at least 2".into(),
        ));
    }
    let bin_step = sample_rate / length as f64;
    let mut indexed = Vec::with_capacity(tones.len());
    for tone in tones.tones() {
        let k = require_grid_index(tone.frequency(), bin_step)?;
        if 2 * k >= length {
            return Err(Error::Undersampled {
                frequency: tone.frequency(),
                sample_rate,
            });
        }
        indexed.push((k as u64, tone.amplitude(), tone.phase()));
    }
    let len = length as u64;
    let samples = (0..len)
        .map(|n| {
            indexed
                .iter()
                .map(|&(k, a, phi)| {
                    // exact integer phase accumulation keeps long records precise
                    let idx = (k * n) % len;
                    a * (TAU * idx as f64 / length as f64 + phi).cos()
                })
                .sum()
        })
        .collect();
    SampledSignal::new(sample_rate, samples)
}
