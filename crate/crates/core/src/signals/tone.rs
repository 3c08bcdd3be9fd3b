use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::power::{dbm_to_amplitude, watts_to_dbm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    If,
    Lo,
}

impl Port {
    pub fn label(self) -> &'static str {
        match self {
            Port::If => "IF",
            Port::Lo => "LO",
        }
    }
}

/// A single cosine tone: `amplitude * cos(2 pi frequency t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    frequency: f64,
    amplitude: f64,
    phase: f64,
}

impl Tone {
    pub fn new(frequency: f64, amplitude: f64, phase: f64) -> Result<Self> {
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tone frequency must be positive, got {frequency}"
            )));
        }
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tone amplitude must be non-negative, got {amplitude}"
            )));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidConfig("tone phase must be finite".into()));
        }
        Ok(Self {
            frequency,
            amplitude,
            phase: phase.rem_euclid(TAU),
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Phase in `[0, 2 pi)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Tone::new(self.frequency, amplitude, self.phase)
    }
}

/// Ordered tones driving one mixer port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawToneSet")]
pub struct ToneSet {
    port: Port,
    tones: Vec<Tone>,
}

#[derive(Deserialize)]
struct RawToneSet {
    port: Port,
    tones: Vec<Tone>,
}

impl TryFrom<RawToneSet> for ToneSet {
    type Error = Error;

    fn try_from(raw: RawToneSet) -> Result<Self> {
        let tones = raw
            .tones
            .iter()
            .map(|t| Tone::new(t.frequency, t.amplitude, t.phase))
            .collect::<Result<Vec<_>>>()?;
        ToneSet::new(raw.port, tones)
    }
}

impl ToneSet {
    pub fn new(port: Port, tones: Vec<Tone>) -> Result<Self> {
        if tones.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{} tone set must contain at least one tone",
                port.label()
            )));
        }
        if tones.windows(2).any(|w| w[1].frequency <= w[0].frequency) {
            return Err(Error::InvalidConfig(format!(
                "{} tone frequencies must be strictly increasing",
                port.label()
            )));
        }
        Ok(Self { port, tones })
    }

    /// Zero-phase tones of equal power `per_tone_dbm` each.
    pub fn equal_power(
        port: Port,
        frequencies: &[f64],
        per_tone_dbm: f64,
        ref_impedance: f64,
    ) -> Result<Self> {
        let amplitude = dbm_to_amplitude(per_tone_dbm, ref_impedance);
        let tones = frequencies
            .iter()
            .map(|&f| Tone::new(f, amplitude, 0.0))
            .collect::<Result<Vec<_>>>()?;
        ToneSet::new(port, tones)
    }

    pub fn port(&self) -> Port {
        self.port
    }

    pub fn tones(&self) -> &[Tone] {
        &self.tones
    }

    pub fn len(&self) -> usize {
        self.tones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tones.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.tones.iter().map(|t| t.frequency).collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.tones.last().map(|t| t.frequency).unwrap_or(0.0)
    }

    /// Total average power of the tone set.
    pub fn input_power_dbm(&self, ref_impedance: f64) -> f64 {
        input_power_dbm(self, ref_impedance)
    }

    /// Same frequencies and phases, every tone set to the equal per-tone
    /// amplitude that makes the total power `total_dbm`.
    pub fn scaled_to_power(&self, total_dbm: f64, ref_impedance: f64) -> Self {
        let amplitude = per_tone_amplitude(total_dbm, self.len(), ref_impedance);
        let tones = self
            .tones
            .iter()
            .map(|t| Tone {
                frequency: t.frequency,
                amplitude,
                phase: t.phase,
            })
            .collect();
        Self {
            port: self.port,
            tones,
        }
    }

    /// Shift every tone by a common time offset `dt` (seconds).
    pub fn delayed(&self, dt: f64) -> Self {
        let tones = self
            .tones
            .iter()
            .map(|t| Tone {
                frequency: t.frequency,
                amplitude: t.amplitude,
                phase: (t.phase - TAU * t.frequency * dt).rem_euclid(TAU),
            })
            .collect();
        Self {
            port: self.port,
            tones,
        }
    }
}

/// Peak amplitude of each of `n_tones` equal tones summing to `total_dbm`.
pub fn per_tone_amplitude(total_dbm: f64, n_tones: usize, ref_impedance: f64) -> f64 {
    dbm_to_amplitude(total_dbm - 10.0 * (n_tones as f64).log10(), ref_impedance)
}

pub fn input_power_dbm(tones: &ToneSet, ref_impedance: f64) -> f64 {
    let watts: f64 = tones
        .tones
        .iter()
        .map(|t| t.amplitude * t.amplitude / 2.0 / ref_impedance)
        .sum();
    watts_to_dbm(watts)
}
