use std::time::Instant;

use super::bins::{select_bins, BinSets};
use super::config::FitConfig;
use super::context::FitContext;
use super::core::fit_core;
use super::phase::fit_phase;
use super::report::{FinalLosses, FitReport};
use super::side::fit_sidebranch;
use crate::error::Result;
use crate::model::{enumerate_products, FitMetadata, MixerModel, PolynomialBlock, ProductKind};
use crate::oracle::ReferenceDataset;

/// Core and sidebranch product bins of the reference spectrum.
pub fn reference_bins(refs: &ReferenceDataset, cfg: &FitConfig) -> Result<BinSets> {
    let t = &refs.tone_config;
    let nyquist = Some(t.sample_rate / 2.0);
    let freqs = |order: usize, kind| -> Result<Vec<f64>> {
        Ok(
            enumerate_products(&t.if_template, &t.lo_tones, order, kind, nyquist)?
                .into_iter()
                .map(|p| p.frequency)
                .collect(),
        )
    };
    let core = freqs(2 * cfg.k_core - 1, ProductKind::Core)?;
    let k_side = cfg.k_side_if().max(cfg.k_side_lo());
    let side = if k_side > 0 {
        freqs(2 * k_side - 1, ProductKind::Sidebranch)?
    } else {
        Vec::new()
    };
    select_bins(
        &refs.s_r,
        &core,
        &side,
        cfg.tau_s,
        cfg.tau_w,
        cfg.freq_limits,
    )
}

/// Core fit, then sidebranch fit with the core frozen, then per-bin phase
/// polynomials. Errors carry the name of the failing step.
pub fn run_algorithm1(refs: &ReferenceDataset, cfg: &FitConfig) -> Result<(MixerModel, FitReport)> {
    let started = Instant::now();
    cfg.validate()?;
    refs.validate()?;
    let bins = reference_bins(refs, cfg).map_err(|e| e.in_step("bin selection"))?;
    let ctx = FitContext::new(refs, &bins, cfg.k_core, cfg.k_side_if(), cfg.k_side_lo())?;

    let core = fit_core(refs, &bins, cfg, &ctx).map_err(|e| e.in_step("core fitting"))?;
    let side = fit_sidebranch(&core.alpha, refs, &bins, cfg, &ctx)
        .map_err(|e| e.in_step("sidebranch fitting"))?;
    let phase = fit_phase(refs, cfg.n_phase).map_err(|e| e.in_step("phase fitting"))?;

    let k = cfg.k_core;
    let model = MixerModel::new(
        PolynomialBlock::new(core.alpha[..k].to_vec()),
        PolynomialBlock::new(core.alpha[k..].to_vec()),
        PolynomialBlock::new(side.gamma.clone()),
        PolynomialBlock::new(side.kappa.clone()),
    )
    .with_phase(phase.polynomials.clone())
    .with_metadata(FitMetadata {
        seed: Some(cfg.seed),
        n_starts: Some(cfg.n_starts),
        weights: Some(cfg.weights),
        tau_s_dbm: Some(cfg.tau_s),
        tau_w_dbm: Some(cfg.tau_w),
        p_in_ref_dbm: Some(refs.p_in_ref),
        bin_step_hz: Some(refs.tone_config.bin_step()),
        ref_impedance_ohms: Some(refs.tone_config.ref_impedance),
        objective: Some(core.terms.total),
        tool_version: Some(env!("CARGO_PKG_VERSION").to_string()),
        timestamp: None,
    })
    .with_bounds(cfg.bounds.clone())
    .map_err(|e| e.in_step("model assembly"))?;

    let report = FitReport {
        alpha_opt: core.alpha.clone(),
        gamma_opt: side.gamma,
        kappa_opt: side.kappa,
        theta_opt: phase
            .polynomials
            .iter()
            .map(|(k, p)| (*k, p.coefficients().to_vec()))
            .collect(),
        core_starts: core.starts,
        side_starts: side.starts,
        losses: FinalLosses {
            core: core.terms,
            sidebranch_residual: side.residual,
            phase_residual_rms: phase.rms,
        },
        bins,
        no_progress: core.no_progress,
        wall_time: started.elapsed(),
    };
    Ok((model, report))
}
