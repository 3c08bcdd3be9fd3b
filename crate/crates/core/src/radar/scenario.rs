use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{load_model, Mixer, MixerModel};
use crate::oracle::SurrogateDevice;
use crate::signals::{OfdmFrameConfig, Port, SampledSignal, Spectrum, ToneSet};

/// Point target: round-trip delay, Doppler shift and linear amplitude gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub delay: f64,
    pub doppler: f64,
    pub gain: f64,
}

impl Target {
    pub fn new(delay: f64, doppler: f64, gain: f64) -> Self {
        Self {
            delay,
            doppler,
            gain,
        }
    }

    /// Target placed on range bin `range_bin` and `doppler_bins` Doppler bins
    /// of the unpadded map. Both may be fractional.
    pub fn at_bins(cfg: &OfdmFrameConfig, range_bin: f64, doppler_bins: f64, gain: f64) -> Self {
        Self {
            delay: range_bin / cfg.bandwidth,
            doppler: doppler_bins / (cfg.symbols as f64 * cfg.symbol_duration()),
            gain,
        }
    }

    pub fn validate(&self, symbol_rate: f64) -> Result<()> {
        if !(self.delay >= 0.0 && self.delay.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "target delay {} s must be non-negative",
                self.delay
            )));
        }
        if !(self.doppler.abs() < symbol_rate / 2.0) {
            return Err(Error::InvalidConfig(format!(
                "target Doppler {} Hz exceeds half the {symbol_rate} Hz symbol rate",
                self.doppler
            )));
        }
        if !self.gain.is_finite() {
            return Err(Error::InvalidConfig("target gain must be finite".into()));
        }
        Ok(())
    }
}

/// Which copy of the OFDM band around the LO comb is processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessedBand {
    /// The copy on the lowest LO tone.
    #[default]
    LowerComb,
    /// The copy on the highest LO tone.
    UpperComb,
}

/// A mixer usable on either end of the radar chain.
#[derive(Debug, Clone, PartialEq)]
pub enum MixerChoice {
    Ideal,
    Surrogate(SurrogateDevice),
    Model(MixerModel),
}

impl MixerChoice {
    pub fn label(&self) -> &'static str {
        match self {
            MixerChoice::Ideal => "ideal",
            MixerChoice::Surrogate(_) => "surrogate",
            MixerChoice::Model(_) => "model",
        }
    }

    pub fn is_ideal(&self) -> bool {
        matches!(self, MixerChoice::Ideal)
    }
}

impl Mixer for MixerChoice {
    fn mix_spectrum(&self, v_if: &SampledSignal, v_lo: &SampledSignal, r: f64) -> Result<Spectrum> {
        match self {
            MixerChoice::Ideal => MixerModel::ideal().mix_spectrum(v_if, v_lo, r),
            MixerChoice::Surrogate(d) => d.mix_spectrum(v_if, v_lo, r),
            MixerChoice::Model(m) => m.mix_spectrum(v_if, v_lo, r),
        }
    }

    fn mix(&self, v_if: &SampledSignal, v_lo: &SampledSignal, r: f64) -> Result<SampledSignal> {
        match self {
            MixerChoice::Ideal => MixerModel::ideal().mix(v_if, v_lo, r),
            MixerChoice::Surrogate(d) => d.mix(v_if, v_lo, r),
            MixerChoice::Model(m) => m.mix(v_if, v_lo, r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarScenario {
    pub frame_config: OfdmFrameConfig,
    /// The LO comb.
    pub lo_tones: ToneSet,
    pub targets: Vec<Target>,
    pub tx_mixer: MixerChoice,
    pub rx_conversion: MixerChoice,
    pub processed_band: ProcessedBand,
    /// White noise density added at the receiver, dBm/Hz.
    pub noise_floor: Option<f64>,
    pub noise_seed: u64,
    /// Simulation rate of the IF and RF records.
    pub sample_rate: f64,
    pub zero_pad: usize,
    /// `(range, doppler)` half-widths in padded map cells. `None` means three
    /// unpadded bins in each direction.
    pub mask_half_widths: Option<(usize, usize)>,
}

pub const TABLE2_LO_HZ: [f64; 2] = [9e9, 9.5e9];

impl RadarScenario {
    /// Table II waveform on the 9 / 9.5 GHz comb at 0 dBm per tone, with the
    /// default two-target scene.
    pub fn table2(tx_mixer: MixerChoice) -> Self {
        let frame_config = OfdmFrameConfig::table2(1);
        let targets = default_targets(&frame_config);
        Self {
            lo_tones: ToneSet::equal_power(
                Port::Lo,
                &TABLE2_LO_HZ,
                0.0,
                frame_config.ref_impedance,
            )
            .expect("fixed comb is valid"),
            frame_config,
            targets,
            tx_mixer,
            rx_conversion: MixerChoice::Ideal,
            processed_band: ProcessedBand::LowerComb,
            noise_floor: None,
            noise_seed: 0,
            sample_rate: 64e9,
            zero_pad: 8,
            mask_half_widths: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.frame_config.validate()?;
        if self.lo_tones.port() != Port::Lo || self.lo_tones.is_empty() {
            return Err(Error::InvalidConfig(
                "the comb must be a non-empty LO tone set".into(),
            ));
        }
        if self.zero_pad == 0 {
            return Err(Error::InvalidConfig("zero_pad must be at least 1".into()));
        }
        let rate = self.symbol_rate();
        for t in &self.targets {
            t.validate(rate)?;
        }
        Ok(())
    }

    pub fn symbol_rate(&self) -> f64 {
        1.0 / self.frame_config.symbol_duration()
    }

    /// Index of the comb tone whose copy is processed.
    pub fn selected_tone(&self) -> usize {
        let tones = self.lo_tones.tones();
        let by_freq =
            |a: &usize, b: &usize| tones[*a].frequency().total_cmp(&tones[*b].frequency());
        let idx = 0..tones.len();
        match self.processed_band {
            ProcessedBand::LowerComb => idx.min_by(by_freq),
            ProcessedBand::UpperComb => idx.max_by(by_freq),
        }
        .expect("validated comb is non-empty")
    }

    /// RF center of the processed copy.
    pub fn processed_center(&self) -> f64 {
        self.lo_tones.tones()[self.selected_tone()].frequency() + self.frame_config.carrier_if
    }

    pub fn mask_half_widths(&self) -> (usize, usize) {
        self.mask_half_widths
            .unwrap_or((3 * self.zero_pad, 3 * self.zero_pad))
    }
}

/// Two targets on the default scene: a strong one on range bin 10 at +1.5
/// Doppler bins and one at half the amplitude on range bin 20, -2.5 bins.
pub fn default_targets(cfg: &OfdmFrameConfig) -> Vec<Target> {
    vec![
        Target::at_bins(cfg, 10.0, 1.5, 1.0),
        Target::at_bins(cfg, 20.0, -2.5, 0.5),
    ]
}

/// Mixer selection in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixerSpec {
    Ideal,
    Surrogate {
        #[serde(default)]
        device: SurrogateDevice,
    },
    /// Surrogate parameters kept in their own TOML file.
    SurrogateFile {
        path: PathBuf,
    },
    /// A model document; relative paths resolve against the scenario file.
    Model {
        path: PathBuf,
    },
}

impl MixerSpec {
    pub fn resolve(&self, base_dir: &Path) -> Result<MixerChoice> {
        Ok(match self {
            MixerSpec::Ideal => MixerChoice::Ideal,
            MixerSpec::Surrogate { device } => {
                device.validate()?;
                MixerChoice::Surrogate(device.clone())
            }
            MixerSpec::SurrogateFile { path } => MixerChoice::Surrogate(
                SurrogateDevice::from_toml(&std::fs::read_to_string(base_dir.join(path))?)?,
            ),
            MixerSpec::Model { path } => {
                MixerChoice::Model(load_model(&std::fs::read_to_string(base_dir.join(path))?)?)
            }
        })
    }

    /// File the spec refers to, resolved against `base_dir`.
    pub fn referenced_file(&self, base_dir: &Path) -> Option<PathBuf> {
        match self {
            MixerSpec::SurrogateFile { path } | MixerSpec::Model { path } => {
                Some(base_dir.join(path))
            }
            _ => None,
        }
    }
}

fn default_rate() -> f64 {
    64e9
}

fn default_pad() -> usize {
    8
}

fn default_rx() -> MixerSpec {
    MixerSpec::Ideal
}

/// Scenario file layout.
///
/// ```toml
/// sample_rate = 64e9
/// zero_pad = 8
/// processed_band = "lower_comb"
///
/// [frame]
/// carrier_if = 1e9
/// bandwidth = 500e6
/// subcarriers = 256
/// cp_length = 32
/// symbols = 32
/// avg_if_power_dbm = -13.0
/// seed = 1
///
/// [lo]
/// port = "lo"
/// tones = [{ frequency = 9e9, amplitude = 0.31622776601683794, phase = 0.0 }]
///
/// [[targets]]
/// delay = 20e-9
/// doppler = 81380.2
/// gain = 1.0
///
/// [tx_mixer]
/// kind = "surrogate"
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    #[serde(default = "default_rate")]
    pub sample_rate: f64,
    #[serde(default = "default_pad")]
    pub zero_pad: usize,
    #[serde(default)]
    pub processed_band: ProcessedBand,
    #[serde(default)]
    pub noise_floor_dbm_hz: Option<f64>,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default)]
    pub mask_half_widths: Option<[usize; 2]>,
    pub frame: OfdmFrameConfig,
    pub lo: ToneSet,
    #[serde(default)]
    pub targets: Vec<Target>,
    pub tx_mixer: MixerSpec,
    #[serde(default = "default_rx")]
    pub rx_conversion: MixerSpec,
}

impl RadarConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn resolve(&self, base_dir: &Path) -> Result<RadarScenario> {
        let s = RadarScenario {
            frame_config: self.frame.clone(),
            lo_tones: self.lo.clone(),
            targets: self.targets.clone(),
            tx_mixer: self.tx_mixer.resolve(base_dir)?,
            rx_conversion: self.rx_conversion.resolve(base_dir)?,
            processed_band: self.processed_band,
            noise_floor: self.noise_floor_dbm_hz,
            noise_seed: self.noise_seed,
            sample_rate: self.sample_rate,
            zero_pad: self.zero_pad,
            mask_half_widths: self.mask_half_widths.map(|[r, d]| (r, d)),
        };
        s.validate()?;
        Ok(s)
    }
}
