use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bins::{spectral_loss_dbm, BinSets};
use super::config::FitConfig;
use super::context::FitContext;
use super::nm::{minimize, BoxMap, NmOptions};
use crate::error::Result;
use crate::oracle::ReferenceDataset;
use crate::signals::dbm_to_amplitude;

/// Terms of the core objective at one coefficient vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// `||f_F - y_F||` in dB.
    pub curve_f: f64,
    /// `||f_IM3 - y_IM3||` in dB.
    pub curve_im3: f64,
    /// `||S_p - S_r||` over the strong bins.
    pub spectral_strong: f64,
    /// `||max(0, S_p - S_r)||` over the weak bins.
    pub spectral_weak: f64,
    pub regularization: f64,
    /// Weighted sum of everything above.
    pub total: f64,
}

/// Best-so-far history of one start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartReport {
    pub start: usize,
    pub initial_objective: f64,
    pub final_objective: f64,
    pub evals: usize,
    pub coefficients: Vec<f64>,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreFit {
    pub alpha: Vec<f64>,
    pub terms: ObjectiveTerms,
    pub starts: Vec<StartReport>,
    /// No start improved on its initial point.
    pub no_progress: bool,
}

fn regularization(coeffs: &[f64], k: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let order = 2 * (n % k) + 1;
            (c * 3f64.powi(order as i32)).powi(2)
        })
        .sum()
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Curve, spectral and regularization terms at `alpha = [a; b]`. Spectral
/// terms use the core output at `p_in_ref`.
pub fn core_objective(
    alpha: &[f64],
    refs: &ReferenceDataset,
    bins: &BinSets,
    cfg: &FitConfig,
    ctx: &FitContext,
) -> ObjectiveTerms {
    let w = cfg.weights;
    let (f_f, f_im3) = ctx.curves(alpha);
    let curve_f = norm_diff(&f_f, &refs.y_f);
    let curve_im3 = norm_diff(&f_im3, &refs.y_im3);
    let y = ctx.core_ref(alpha);
    let pred = |k: usize| ctx.dbm(k, y[ctx.position(k).expect("tracked bin")]);
    let r = refs.s_r.power_dbm();
    let strong = spectral_loss_dbm(pred, |k| r[k], bins, 1.0, 0.0);
    let weak = spectral_loss_dbm(pred, |k| r[k], bins, 0.0, 1.0);
    let reg = if cfg.lambda > 0.0 {
        regularization(alpha, ctx.k_core())
    } else {
        0.0
    };
    ObjectiveTerms {
        curve_f,
        curve_im3,
        spectral_strong: strong,
        spectral_weak: weak,
        regularization: reg,
        total: w.w_f * curve_f
            + w.w_im3 * curve_im3
            + w.w_s * strong
            + w.w_w * weak
            + cfg.lambda * reg,
    }
}

/// Start point from the smallest-power fundamental: `a_1 = b_1 =
/// sqrt(2 A_out / (A_in A_lo1))`, higher orders zero.
pub fn linear_start(refs: &ReferenceDataset, k_core: usize) -> Vec<f64> {
    let t = &refs.tone_config;
    let a_out = dbm_to_amplitude(refs.y_f[0], t.ref_impedance);
    let a_in = crate::signals::per_tone_amplitude(
        refs.power_grid[0],
        t.if_template.len(),
        t.ref_impedance,
    );
    let a_lo = t.lo_tones.tones()[0].amplitude();
    let g = if a_in > 0.0 && a_lo > 0.0 {
        (2.0 * a_out / (a_in * a_lo)).sqrt()
    } else {
        0.0
    };
    let mut alpha = vec![0.0; 2 * k_core];
    alpha[0] = g;
    alpha[k_core] = g;
    alpha
}

pub(crate) fn random_unit(seed: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random::<f64>()).collect()
}

pub(crate) fn nm_options(cfg: &FitConfig) -> NmOptions {
    NmOptions {
        tolerance: cfg.tolerance,
        max_evals: cfg.max_evals,
        ..Default::default()
    }
}

/// Multi-start bounded search for the core coefficients.
///
/// Start 0 is [`linear_start`]; start `s > 0` is uniform in the bounds,
/// drawn from a generator seeded with `seed ^ s`. Starts run in parallel,
/// each is sequential, and the lowest objective wins with ties going to the
/// lowest start index, so the result does not depend on the schedule.
pub fn fit_core(
    refs: &ReferenceDataset,
    bins: &BinSets,
    cfg: &FitConfig,
    ctx: &FitContext,
) -> Result<CoreFit> {
    let bounds = cfg.core_bounds();
    let map = BoxMap::new(&bounds);
    let opts = nm_options(cfg);
    let objective = |u: &[f64]| core_objective(&map.to_coefficients(u), refs, bins, cfg, ctx).total;
    let starts: Vec<StartReport> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|s| {
            let u0 = if s == 0 {
                map.to_unit(&linear_start(refs, cfg.k_core))
            } else {
                random_unit(cfg.seed ^ s as u64, map.dim())
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
    let alpha = best.coefficients.clone();
    Ok(CoreFit {
        terms: core_objective(&alpha, refs, bins, cfg, ctx),
        no_progress: starts
            .iter()
            .all(|s| s.final_objective >= s.initial_objective),
        alpha,
        starts,
    })
}
