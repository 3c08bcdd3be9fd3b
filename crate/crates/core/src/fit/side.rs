use num_complex::Complex64;
use rayon::prelude::*;

use super::bins::BinSets;
use super::config::{FitConfig, SideResidual};
use super::context::FitContext;
use super::core::{nm_options, random_unit, StartReport};
use super::nm::{minimize, BoxMap};
use crate::error::Result;
use crate::oracle::ReferenceDataset;
use crate::signals::per_tone_amplitude;

/// Keeps sidebranch PRNG streams apart from the core ones.
const SIDE_STREAM: u64 = 0x5349_4445;

#[derive(Debug, Clone, PartialEq)]
pub struct SideFit {
    pub gamma: Vec<f64>,
    pub kappa: Vec<f64>,
    /// RMS residual over the sidebranch bins, in dB (or volts for the
    /// complex-linear residual).
    pub residual: f64,
    pub starts: Vec<StartReport>,
}

/// `||P_dBm(Y_c + Y_sb) - S_r||` (or the complex-linear version) over the
/// sidebranch bins with the core frozen.
pub fn side_objective(
    gamma: &[f64],
    kappa: &[f64],
    core: &[Complex64],
    refs: &ReferenceDataset,
    bins: &BinSets,
    cfg: &FitConfig,
    ctx: &FitContext,
) -> f64 {
    let side = ctx.side_ref(gamma, kappa);
    let r = &refs.s_r;
    let sum: f64 = bins
        .b_side
        .iter()
        .map(|&k| {
            let p = ctx.position(k).expect("tracked bin");
            let y = core[p] + side[p];
            match cfg.side_residual {
                SideResidual::Dbm => (ctx.dbm(k, y) - r.power_dbm()[k]).powi(2),
                SideResidual::ComplexLinear => (y - r.bins()[k]).norm_sqr(),
            }
        })
        .sum();
    sum.sqrt()
}

/// Leakage estimate: `gamma_1` from the first IF tone bin and `kappa_1` from
/// the first LO tone bin, when those bins are sidebranch bins.
fn leak_start(refs: &ReferenceDataset, bins: &BinSets, cfg: &FitConfig) -> Vec<f64> {
    let t = &refs.tone_config;
    let mut x = vec![0.0; cfg.k_side_if() + cfg.k_side_lo()];
    let est = |f: f64, amp: f64, phase: f64| -> Option<f64> {
        let k = refs.s_r.bin_index(f).ok()?;
        if amp <= 0.0 || !bins.b_side.contains(&k) {
            return None;
        }
        Some((refs.s_r.bins()[k] * Complex64::from_polar(1.0, -phase)).re / amp)
    };
    if cfg.k_side_if() > 0 {
        let tone = t.if_template.tones()[0];
        let amp = per_tone_amplitude(refs.p_in_ref, t.if_template.len(), t.ref_impedance);
        x[0] = est(tone.frequency(), amp, tone.phase()).unwrap_or(0.0);
    }
    if cfg.k_side_lo() > 0 {
        let tone = t.lo_tones.tones()[0];
        x[cfg.k_side_if()] = est(tone.frequency(), tone.amplitude(), tone.phase()).unwrap_or(0.0);
    }
    x
}

/// Fit the two sidebranch polynomials with the core frozen at `alpha`.
pub fn fit_sidebranch(
    alpha: &[f64],
    refs: &ReferenceDataset,
    bins: &BinSets,
    cfg: &FitConfig,
    ctx: &FitContext,
) -> Result<SideFit> {
    let bounds = cfg.side_bounds();
    let map = BoxMap::new(&bounds);
    let ki = cfg.k_side_if();
    let zero = map.to_coefficients(&map.to_unit(&vec![0.0; bounds.len()]));
    if bins.b_side.is_empty() || bounds.is_empty() {
        return Ok(SideFit {
            gamma: zero[..ki].to_vec(),
            kappa: zero[ki..].to_vec(),
            residual: 0.0,
            starts: Vec::new(),
        });
    }
    let core = ctx.core_ref(alpha);
    let n = bins.b_side.len() as f64;
    let objective = |u: &[f64]| {
        let x = map.to_coefficients(u);
        side_objective(&x[..ki], &x[ki..], &core, refs, bins, cfg, ctx)
    };
    let opts = nm_options(cfg);
    let starts: Vec<StartReport> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|s| {
            let u0 = if s == 0 {
                map.to_unit(&leak_start(refs, bins, cfg))
            } else {
                random_unit(cfg.seed ^ SIDE_STREAM ^ s as u64, map.dim())
            };
            let out = minimize(objective, &u0, &opts);
            StartReport {
                start: s,
                initial_objective: out.initial,
                final_objective: out.f,
                evals: out.evals,
                coefficients: map.to_coefficients(&out.x),
                trace: out.trace,
            }
        })
        .collect();
    let best = starts
        .iter()
        .min_by(|a, b| {
            a.final_objective
                .total_cmp(&b.final_objective)
                .then(a.start.cmp(&b.start))
        })
        .expect("at least one start");
    let x = best.coefficients.clone();
    Ok(SideFit {
        residual: best.final_objective / n.sqrt(),
        gamma: x[..ki].to_vec(),
        kappa: x[ki..].to_vec(),
        starts,
    })
}
