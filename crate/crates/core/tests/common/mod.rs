//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use multibox::model::MixerModel;
use multibox::signals::ToneSet;
use num_complex::Complex64;

/// Signal as a sparse sum of complex exponentials keyed by signed bin.
pub type Series = BTreeMap<i64, Complex64>;

pub fn tone_series(tones: &ToneSet, bin_step: f64) -> Series {
    let mut s = Series::new();
    for t in tones.tones() {
        let k = (t.frequency() / bin_step).round() as i64;
        let c = Complex64::from_polar(t.amplitude() / 2.0, t.phase());
        *s.entry(k).or_default() += c;
        *s.entry(-k).or_default() += c.conj();
    }
    s
}

pub fn series_mul(a: &Series, b: &Series) -> Series {
    let mut out = Series::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            *out.entry(ka + kb).or_default() += va * vb;
        }
    }
    out
}

pub fn series_add(a: &Series, b: &Series) -> Series {
    let mut out = a.clone();
    for (k, v) in b {
        *out.entry(*k).or_default() += v;
    }
    out
}

/// `sum_i c_i x^(2i+1)` by repeated convolution.
pub fn odd_poly_series(x: &Series, coeffs: &[f64]) -> Series {
    let x2 = series_mul(x, x);
    let mut power = x.clone();
    let mut out = Series::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if i > 0 {
            power = series_mul(&power, &x2);
        }
        for (k, v) in &power {
            *out.entry(*k).or_default() += v * c;
        }
    }
    out
}

pub fn mixer_series(model: &MixerModel, v_if: &Series, v_lo: &Series) -> Series {
    let core = series_mul(
        &odd_poly_series(v_if, model.core_if().coefficients()),
        &odd_poly_series(v_lo, model.core_lo().coefficients()),
    );
    let side = series_add(
        &odd_poly_series(v_if, model.side_if().coefficients()),
        &odd_poly_series(v_lo, model.side_lo().coefficients()),
    );
    series_add(&core, &side)
}

/// Peak-amplitude phasors of an `n`-sample record, aliases folded.
pub fn one_sided(series: &Series, n: usize) -> Vec<Complex64> {
    let mut folded = vec![Complex64::new(0.0, 0.0); n];
    for (k, v) in series {
        folded[k.rem_euclid(n as i64) as usize] += v;
    }
    (0..=n / 2)
        .map(|k| {
            if k == 0 || (n % 2 == 0 && k == n / 2) {
                folded[k]
            } else {
                folded[k] * 2.0
            }
        })
        .collect()
}

/// Magnitude of the uniform-window kernel of an `m`-point DFT, `u` bins
/// away from the response peak, normalized to 1 at the peak.
pub fn dirichlet(u: f64, m: usize) -> f64 {
    let den = (m as f64) * (PI * u / m as f64).sin();
    if den.abs() < 1e-15 {
        1.0
    } else {
        ((PI * u).sin() / den).abs()
    }
}

/// Power cut sampled every `1/pad` bins around a target `offset` bins away
/// from cell 0, peak cell first.
pub fn dirichlet_cut(m: usize, pad: usize, offset: f64) -> Vec<f64> {
    (0..m * pad)
        .map(|c| {
            let u = c as f64 / pad as f64 - offset;
            dirichlet(u, m).powi(2)
        })
        .collect()
}

/// Level classes of one core bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Strong,
    Weak,
    Discarded,
}

pub fn classify(level_dbm: f64, tau_s: f64, tau_w: f64) -> Level {
    if level_dbm >= tau_s {
        Level::Strong
    } else if level_dbm >= tau_w {
        Level::Weak
    } else {
        Level::Discarded
    }
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}
