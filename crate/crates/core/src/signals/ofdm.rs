use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::power::dbm_to_watts;
use super::sampled::{grid_index, SampledSignal};
use super::DEFAULT_REF_IMPEDANCE;
use crate::dsp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    #[default]
    Qpsk,
}

fn default_ref_impedance() -> f64 {
    DEFAULT_REF_IMPEDANCE
}

/// OFDM frame parameters. Subcarrier `n` of the grid sits at baseband offset
/// `(n - N/2) * bandwidth / N`, so row `N/2` is the center subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmFrameConfig {
    /// IF carrier `f_c` in Hz.
    pub carrier_if: f64,
    /// Baseband bandwidth `B` in Hz; also the baseband sample rate.
    pub bandwidth: f64,
    pub subcarriers: usize,
    /// Cyclic prefix length in baseband samples.
    pub cp_length: usize,
    pub symbols: usize,
    /// Average power of the upconverted IF signal.
    pub avg_if_power_dbm: f64,
    #[serde(default)]
    pub constellation: Constellation,
    pub seed: u64,
    /// Number of central subcarriers left empty.
    #[serde(default)]
    pub guard_center: usize,
    #[serde(default = "default_ref_impedance")]
    pub ref_impedance: f64,
}

impl OfdmFrameConfig {
    /// The 1 GHz, 500 MHz, 256 x 32 frame with a 32-sample prefix at -13 dBm.
    pub fn table2(seed: u64) -> Self {
        Self {
            carrier_if: 1e9,
            bandwidth: 500e6,
            subcarriers: 256,
            cp_length: 32,
            symbols: 32,
            avg_if_power_dbm: -13.0,
            constellation: Constellation::Qpsk,
            seed,
            guard_center: 0,
            ref_impedance: DEFAULT_REF_IMPEDANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.subcarriers == 0 || self.symbols == 0 {
            return bad("subcarrier and symbol counts must be positive");
        }
        if self.cp_length >= self.subcarriers {
            return bad("cyclic prefix must be shorter than the symbol");
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return bad("bandwidth must be positive");
        }
        if !(self.carrier_if > self.bandwidth / 2.0) {
            return bad("IF carrier must exceed half the bandwidth");
        }
        if self.guard_center >= self.subcarriers {
            return bad("guard band must leave at least one active subcarrier");
        }
        if !(self.ref_impedance > 0.0) {
            return bad("reference impedance must be positive");
        }
        Ok(())
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.bandwidth / self.subcarriers as f64
    }

    /// Samples per symbol including the prefix.
    pub fn symbol_len(&self) -> usize {
        self.subcarriers + self.cp_length
    }

    pub fn symbol_duration(&self) -> f64 {
        self.symbol_len() as f64 / self.bandwidth
    }

    /// Baseband samples per frame.
    pub fn frame_len(&self) -> usize {
        self.symbol_len() * self.symbols
    }

    /// Frequency step of the frame-length DFT grid, `1 / frame duration`.
    pub fn frame_bin_step(&self) -> f64 {
        self.bandwidth / self.frame_len() as f64
    }

    pub fn is_active(&self, subcarrier: usize) -> bool {
        let start = self.subcarriers / 2 - self.guard_center / 2;
        !(start..start + self.guard_center).contains(&subcarrier)
    }

    fn fft_slot(&self, subcarrier: usize) -> usize {
        dsp::wrap_index(
            subcarrier as i64 - (self.subcarriers / 2) as i64,
            self.subcarriers,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFrame {
    config: OfdmFrameConfig,
    grid: Array2<Complex64>,
    baseband: Vec<Complex64>,
    amplitude_scale: f64,
}

impl OfdmFrame {
    /// Modulate an explicit `subcarriers x symbols` grid.
    pub fn from_grid(config: OfdmFrameConfig, grid: Array2<Complex64>) -> Result<Self> {
        config.validate()?;
        let (n, m) = (config.subcarriers, config.symbols);
        if grid.dim() != (n, m) {
            return Err(Error::InvalidConfig(format!(
                "grid shape {:?} does not match {n} x {m}",
                grid.dim()
            )));
        }
        let mut baseband = Vec::with_capacity(config.frame_len());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for sym in 0..m {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for sc in 0..n {
                buf[config.fft_slot(sc)] = grid[(sc, sym)];
            }
            dsp::ifft(&mut buf);
            baseband.extend_from_slice(&buf[n - config.cp_length..]);
            baseband.extend_from_slice(&buf);
        }
        let mean_sq = baseband.iter().map(|z| z.norm_sqr()).sum::<f64>() / baseband.len() as f64;
        if !(mean_sq > 0.0) {
            return Err(Error::ZeroPower);
        }
        // passband-equivalent convention: P = mean|x|^2 / (2 R)
        let target = 2.0 * config.ref_impedance * dbm_to_watts(config.avg_if_power_dbm);
        let amplitude_scale = (target / mean_sq).sqrt();
        baseband.iter_mut().for_each(|z| *z *= amplitude_scale);
        Ok(Self {
            config,
            grid,
            baseband,
            amplitude_scale,
        })
    }

    pub fn config(&self) -> &OfdmFrameConfig {
        &self.config
    }

    pub fn grid(&self) -> &Array2<Complex64> {
        &self.grid
    }

    pub fn baseband(&self) -> &[Complex64] {
        &self.baseband
    }

    /// Gain from grid units to baseband volts.
    pub fn amplitude_scale(&self) -> f64 {
        self.amplitude_scale
    }

    /// Average baseband power under the passband-equivalent convention.
    pub fn baseband_power_dbm(&self) -> f64 {
        let mean_sq =
            self.baseband.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.baseband.len() as f64;
        super::power::watts_to_dbm(mean_sq / 2.0 / self.config.ref_impedance)
    }

    /// Demodulate a baseband record of this frame's shape back to grid units.
    pub fn demodulate(&self, baseband: &[Complex64]) -> Result<Array2<Complex64>> {
        let mut grid = demodulate_symbols(baseband, &self.config)?;
        grid.mapv_inplace(|z| z / self.amplitude_scale);
        Ok(grid)
    }
}

/// Strip each cyclic prefix and take the per-symbol forward DFT. Output is
/// `subcarriers x symbols`, normalized by `1/N` so a clean frame returns its
/// grid times the frame amplitude scale.
pub fn demodulate_symbols(
    baseband: &[Complex64],
    config: &OfdmFrameConfig,
) -> Result<Array2<Complex64>> {
    let (n, m) = (config.subcarriers, config.symbols);
    if baseband.len() != config.frame_len() {
        return Err(Error::LengthMismatch(baseband.len(), config.frame_len()));
    }
    let mut grid = Array2::zeros((n, m));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for sym in 0..m {
        let start = sym * config.symbol_len() + config.cp_length;
        buf.copy_from_slice(&baseband[start..start + n]);
        dsp::fft(&mut buf);
        for sc in 0..n {
            grid[(sc, sym)] = buf[config.fft_slot(sc)] / n as f64;
        }
    }
    Ok(grid)
}

/// Seeded i.i.d. unit-magnitude QPSK payload; guard subcarriers are zero.
pub fn qpsk_grid(config: &OfdmFrameConfig) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut grid = Array2::zeros((config.subcarriers, config.symbols));
    for sym in 0..config.symbols {
        for sc in 0..config.subcarriers {
            let re = if rng.random::<bool>() { s } else { -s };
            let im = if rng.random::<bool>() { s } else { -s };
            if config.is_active(sc) {
                grid[(sc, sym)] = Complex64::new(re, im);
            }
        }
    }
    grid
}

pub fn generate_ofdm_frame(config: &OfdmFrameConfig) -> Result<OfdmFrame> {
    config.validate()?;
    OfdmFrame::from_grid(config.clone(), qpsk_grid(config))
}

/// Ideal interpolation of the baseband to `sample_rate` followed by
/// modulation `Re{x(t) e^{j 2 pi f_c t}}`. The baseband occupies the signed
/// frame-DFT bins `[-L/2, L/2)` exactly, so adjacent copies never share a bin.
pub fn upconvert_to_if(frame: &OfdmFrame, sample_rate: f64) -> Result<SampledSignal> {
    let cfg = frame.config();
    let ratio = sample_rate / cfg.bandwidth;
    if !(ratio >= 1.0 && (ratio - ratio.round()).abs() < 1e-9) {
        return Err(Error::RateNotMultiple {
            sample_rate,
            bandwidth: cfg.bandwidth,
        });
    }
    let up = ratio.round() as usize;
    let top = cfg.carrier_if + cfg.bandwidth / 2.0;
    if !(sample_rate > 2.0 * top) {
        return Err(Error::Undersampled {
            frequency: top,
            sample_rate,
        });
    }
    let l = frame.baseband().len();
    let kc = grid_index(cfg.carrier_if, cfg.frame_bin_step()).ok_or(Error::NonCommensurate {
        frequency: cfg.carrier_if,
        bin_step: cfg.frame_bin_step(),
    })? as i64;

    let mut x = frame.baseband().to_vec();
    dsp::fft(&mut x);
    let total = l * up;
    let mut y = vec![Complex64::new(0.0, 0.0); total];
    let gain = up as f64 / 2.0;
    for (k, &xk) in x.iter().enumerate() {
        let p = (kc + dsp::signed_index(k, l)) as usize;
        y[p] += xk * gain;
        y[total - p] += (xk * gain).conj();
    }
    let time = dsp::ifft_normalized(y);
    SampledSignal::new(sample_rate, time.into_iter().map(|z| z.re).collect())
}
