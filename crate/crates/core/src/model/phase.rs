use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::mixer::MixerModel;
use crate::error::{Error, Result};
use crate::signals::{grid_index, Spectrum, ToneSet};

/// Which mixing sideband counts as the fundamental.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sideband {
    /// `f_lo + f_if`
    #[default]
    Upper,
    /// `|f_lo - f_if|`
    Lower,
}

impl Sideband {
    pub fn frequency(self, f_if: f64, f_lo: f64) -> f64 {
        match self {
            Sideband::Upper => f_lo + f_if,
            Sideband::Lower => (f_lo - f_if).abs(),
        }
    }

    fn bin(self, k_if: usize, k_lo: usize) -> usize {
        match self {
            Sideband::Upper => k_lo + k_if,
            Sideband::Lower => k_lo.abs_diff(k_if),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundamentalEntry {
    pub bin: usize,
    pub if_index: usize,
    pub lo_index: usize,
    pub sideband: Sideband,
}

/// Output bins designated as fundamental mixing products.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FundamentalMap {
    entries: Vec<FundamentalEntry>,
}

impl FundamentalMap {
    pub fn new(entries: Vec<FundamentalEntry>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.bin) {
                return Err(Error::InvalidConfig(format!(
                    "fundamental bin {} listed twice",
                    e.bin
                )));
            }
        }
        Ok(Self { entries })
    }

    /// One entry per (IF tone, LO tone) pair on a grid of step `bin_step`.
    pub fn from_tones(
        if_tones: &ToneSet,
        lo_tones: &ToneSet,
        sideband: Sideband,
        bin_step: f64,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for (j, lo) in lo_tones.tones().iter().enumerate() {
            for (i, t) in if_tones.tones().iter().enumerate() {
                let f = sideband.frequency(t.frequency(), lo.frequency());
                let bin = grid_index(f, bin_step).ok_or(Error::OffGridProduct(f))?;
                entries.push(FundamentalEntry {
                    bin,
                    if_index: i,
                    lo_index: j,
                    sideband,
                });
            }
        }
        Self::new(entries)
    }

    /// Fundamentals of arbitrary inputs: every occupied IF bin mixed with
    /// every occupied LO bin. A bin reached twice keeps its first pairing.
    /// Occupied means within `dbc` of the strongest bin of that input.
    pub fn detect(if_spec: &Spectrum, lo_spec: &Spectrum, sideband: Sideband, dbc: f64) -> Self {
        let occupied = |s: &Spectrum| -> Vec<usize> {
            let p = s.power_dbm();
            let peak = p.iter().skip(1).cloned().fold(f64::NEG_INFINITY, f64::max);
            (1..p.len())
                .filter(|&k| p[k] > s.floor_dbm() && p[k] >= peak + dbc)
                .collect()
        };
        let ifs = occupied(if_spec);
        let los = occupied(lo_spec);
        let n = if_spec.len();
        let mut seen = BTreeSet::new();
        let mut entries = Vec::new();
        for (j, &kl) in los.iter().enumerate() {
            for (i, &ki) in ifs.iter().enumerate() {
                let bin = sideband.bin(ki, kl);
                if bin == 0 || bin >= n || !seen.insert(bin) {
                    continue;
                }
                entries.push(FundamentalEntry {
                    bin,
                    if_index: i,
                    lo_index: j,
                    sideband,
                });
            }
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[FundamentalEntry] {
        &self.entries
    }

    pub fn bins(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.bin).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// How `apply_phase` treats a fundamental without a stored polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    Strict,
    #[default]
    Lenient,
}

/// Rotate each fundamental bin by its phase polynomial evaluated at `p_in`.
/// Magnitudes and the power view are left exactly as they were.
pub fn apply_phase(
    model: &MixerModel,
    spectrum: &Spectrum,
    fundamentals: &FundamentalMap,
    p_in_dbm: f64,
    mode: PhaseMode,
) -> Result<Spectrum> {
    let mut rotations = Vec::with_capacity(fundamentals.len());
    for e in fundamentals.entries() {
        if e.bin >= spectrum.len() {
            return Err(Error::InvalidConfig(format!(
                "fundamental bin {} outside a {}-bin spectrum",
                e.bin,
                spectrum.len()
            )));
        }
        match model.phase().get(&e.bin) {
            Some(p) => rotations.push((e.bin, p.eval(p_in_dbm))),
            None if mode == PhaseMode::Strict => return Err(Error::MissingPhasePolynomial(e.bin)),
            None => {}
        }
    }
    spectrum.rotated(&rotations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhasePolynomial;
    use crate::signals::{compute_spectrum, synth_multitone, Port, Tone};
    use num_complex::Complex64;
    use std::collections::BTreeMap;
    use std::f64::consts::FRAC_PI_2;

    fn setup() -> (Spectrum, FundamentalMap) {
        let lo = ToneSet::new(Port::Lo, vec![Tone::new(9e9, 1.0, 0.0).unwrap()]).unwrap();
        let ift = ToneSet::new(Port::If, vec![Tone::new(1e9, 1.0, 0.0).unwrap()]).unwrap();
        let v_if = synth_multitone(&ift, 32e9, 320).unwrap();
        let v_lo = synth_multitone(&lo, 32e9, 320).unwrap();
        let out = crate::model::eval_mixer(&MixerModel::ideal(), &v_if, &v_lo).unwrap();
        let spec = compute_spectrum(&out, 50.0);
        let fund = FundamentalMap::from_tones(&ift, &lo, Sideband::Upper, spec.bin_step()).unwrap();
        (spec, fund)
    }

    fn with_theta(fund: &FundamentalMap, theta: Vec<f64>) -> MixerModel {
        let map: BTreeMap<_, _> = fund
            .bins()
            .into_iter()
            .map(|k| (k, PhasePolynomial::new(theta.clone())))
            .collect();
        MixerModel::ideal().with_phase(map)
    }

    #[test]
    fn zero_theta_is_identity() {
        let (spec, fund) = setup();
        let out = apply_phase(
            &with_theta(&fund, vec![0.0, 0.0]),
            &spec,
            &fund,
            -10.0,
            PhaseMode::Strict,
        )
        .unwrap();
        assert_eq!(out, spec);
    }

    #[test]
    fn constant_quarter_turn() {
        let (spec, fund) = setup();
        let k = fund.bins()[0];
        let out = apply_phase(
            &with_theta(&fund, vec![FRAC_PI_2]),
            &spec,
            &fund,
            0.0,
            PhaseMode::Strict,
        )
        .unwrap();
        let before = spec.bins()[k];
        let after = out.bins()[k];
        assert!((after - before * Complex64::i()).norm() < 1e-15);
        assert_eq!(out.power_dbm(), spec.power_dbm());
    }

    #[test]
    fn linear_theta_at_minus_ten() {
        let (spec, fund) = setup();
        let k = fund.bins()[0];
        let out = apply_phase(
            &with_theta(&fund, vec![0.0, 0.1]),
            &spec,
            &fund,
            -10.0,
            PhaseMode::Strict,
        )
        .unwrap();
        let d = (out.bins()[k] / spec.bins()[k]).arg();
        assert!((d + 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_polynomial_strict_vs_lenient() {
        let (spec, fund) = setup();
        let m = MixerModel::ideal();
        assert!(matches!(
            apply_phase(&m, &spec, &fund, 0.0, PhaseMode::Strict),
            Err(Error::MissingPhasePolynomial(_))
        ));
        assert_eq!(
            apply_phase(&m, &spec, &fund, 0.0, PhaseMode::Lenient).unwrap(),
            spec
        );
    }

    #[test]
    fn detect_matches_tone_map() {
        let (spec, fund) = setup();
        let lo = ToneSet::new(Port::Lo, vec![Tone::new(9e9, 1.0, 0.0).unwrap()]).unwrap();
        let ift = ToneSet::new(Port::If, vec![Tone::new(1e9, 0.1, 0.0).unwrap()]).unwrap();
        let si = compute_spectrum(&synth_multitone(&ift, 32e9, 320).unwrap(), 50.0);
        let sl = compute_spectrum(&synth_multitone(&lo, 32e9, 320).unwrap(), 50.0);
        let d = FundamentalMap::detect(&si, &sl, Sideband::Upper, -160.0);
        assert_eq!(d.bins(), fund.bins());
        assert_eq!(spec.frequency(d.bins()[0]), 10e9);
    }
}
