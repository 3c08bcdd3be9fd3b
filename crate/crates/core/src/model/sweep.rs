use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mixer::{Mixer, MixerModel};
use crate::error::{Error, Result};
use crate::signals::{synth_multitone, SampledSignal, Spectrum, ToneSet};

/// Tone drive and capture grid shared by sweeps and characterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSweep {
    /// IF tones; only frequencies and phases are used, amplitudes follow the
    /// swept power with an equal split.
    pub if_template: ToneSet,
    pub lo_tones: ToneSet,
    pub fund_freq: f64,
    pub im3_freq: f64,
    pub sample_rate: f64,
    pub length: usize,
    #[serde(default = "default_impedance")]
    pub ref_impedance: f64,
}

fn default_impedance() -> f64 {
    crate::signals::DEFAULT_REF_IMPEDANCE
}

/// LO comb of the multi-tone characterization.
pub const TABLE1_MULTI_LO_HZ: [f64; 2] = [9e9, 9.5e9];
pub const TABLE1_SINGLE_LO_HZ: [f64; 1] = [9e9];

impl ToneSweep {
    /// Two IF tones at 0.995 and 1.005 GHz against `lo_freqs` at 0 dBm each,
    /// captured at 64 GS/s over 12800 samples; fundamental at 9.995 GHz and
    /// IM3 at 9.985 GHz.
    pub fn table1(lo_freqs: &[f64]) -> Result<Self> {
        let r = crate::signals::DEFAULT_REF_IMPEDANCE;
        Ok(Self {
            if_template: ToneSet::equal_power(
                crate::signals::Port::If,
                &[0.995e9, 1.005e9],
                -20.0,
                r,
            )?,
            lo_tones: ToneSet::equal_power(crate::signals::Port::Lo, lo_freqs, 0.0, r)?,
            fund_freq: 9.995e9,
            im3_freq: 9.985e9,
            sample_rate: 64e9,
            length: 12800,
            ref_impedance: r,
        })
    }

    pub fn bin_step(&self) -> f64 {
        self.sample_rate / self.length as f64
    }

    pub fn lo_signal(&self) -> Result<SampledSignal> {
        synth_multitone(&self.lo_tones, self.sample_rate, self.length)
    }

    pub fn if_signal(&self, p_in_dbm: f64) -> Result<SampledSignal> {
        synth_multitone(
            &self
                .if_template
                .scaled_to_power(p_in_dbm, self.ref_impedance),
            self.sample_rate,
            self.length,
        )
    }

    /// Check that both read-out frequencies land on the capture grid.
    pub fn bins(&self) -> Result<(usize, usize)> {
        let probe = Spectrum::from_bins(
            self.bin_step(),
            self.length,
            vec![Default::default(); self.length / 2 + 1],
            self.ref_impedance,
            crate::signals::DEFAULT_FLOOR_DBM,
        )?;
        Ok((
            probe.bin_index(self.fund_freq)?,
            probe.bin_index(self.im3_freq)?,
        ))
    }
}

/// Fundamental and IM3 output power over an input power sweep.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AmAmCurves {
    pub f_f: Vec<f64>,
    pub f_im3: Vec<f64>,
}

pub(crate) fn check_grid(power_grid: &[f64]) -> Result<()> {
    if power_grid.is_empty() {
        return Err(Error::InvalidConfig("power grid is empty".into()));
    }
    if power_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidConfig(
            "power grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Output spectrum of `mixer` at every grid power, in grid order.
pub fn sweep_spectra<M: Mixer + ?Sized>(
    mixer: &M,
    setup: &ToneSweep,
    power_grid: &[f64],
) -> Result<Vec<Spectrum>> {
    check_grid(power_grid)?;
    let lo = setup.lo_signal()?;
    power_grid
        .par_iter()
        .map(|&p| mixer.mix_spectrum(&setup.if_signal(p)?, &lo, setup.ref_impedance))
        .collect()
}

pub fn sweep_mixer<M: Mixer + ?Sized>(
    mixer: &M,
    setup: &ToneSweep,
    power_grid: &[f64],
) -> Result<AmAmCurves> {
    let (kf, k3) = setup.bins()?;
    let spectra = sweep_spectra(mixer, setup, power_grid)?;
    Ok(AmAmCurves {
        f_f: spectra.iter().map(|s| s.power_dbm()[kf]).collect(),
        f_im3: spectra.iter().map(|s| s.power_dbm()[k3]).collect(),
    })
}

/// Fundamental and IM3 AM-AM curves of a model.
pub fn sweep_am_am(
    model: &MixerModel,
    setup: &ToneSweep,
    power_grid: &[f64],
) -> Result<AmAmCurves> {
    sweep_mixer(model, setup, power_grid)
}

/// Least-squares line `(slope, intercept)` through the points.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Input 1 dB compression point of a swept fundamental curve.
///
/// The linear reference is a least-squares line over the lowest quarter of
/// the grid (at least two points). Returns `None` if the curve never drops
/// 1 dB below it.
pub fn p1db(power_grid: &[f64], f_f: &[f64]) -> Option<f64> {
    let n = power_grid.len().min(f_f.len());
    if n < 3 {
        return None;
    }
    let m = (n / 4).max(2);
    let (slope, icpt) = fit_line(&power_grid[..m], &f_f[..m]);
    let dev = |i: usize| f_f[i] - (slope * power_grid[i] + icpt);
    let i = (m..n).find(|&i| dev(i) <= -1.0)?;
    let (d0, d1) = (dev(i - 1), dev(i));
    let t = if d0 == d1 {
        1.0
    } else {
        (-1.0 - d0) / (d1 - d0)
    };
    Some(power_grid[i - 1] + t.clamp(0.0, 1.0) * (power_grid[i] - power_grid[i - 1]))
}
