use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signals::{grid_index, Spectrum};

/// Bin index sets used by the spectral losses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BinSets {
    /// Core product bins inside the frequency limits.
    pub b_core: Vec<usize>,
    /// Core bins with `S_r >= tau_s`.
    pub b_strong: Vec<usize>,
    /// Core bins with `tau_w <= S_r < tau_s`.
    pub b_weak: Vec<usize>,
    /// Sidebranch product bins that are not core bins.
    pub b_side: Vec<usize>,
    pub tau_s: f64,
    pub tau_w: f64,
    pub freq_limits: Option<(f64, f64)>,
}

fn product_bins(
    s_r: &Spectrum,
    freqs: &[f64],
    limits: Option<(f64, f64)>,
) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for &f in freqs {
        if let Some((lo, hi)) = limits {
            if f < lo || f > hi {
                continue;
            }
        }
        let k = grid_index(f, s_r.bin_step()).ok_or(Error::OffGridProduct(f))?;
        if k >= s_r.len() {
            return Err(Error::OffGridProduct(f));
        }
        out.insert(k);
    }
    Ok(out)
}

/// Partition product bins of the reference spectrum by level.
pub fn select_bins(
    s_r: &Spectrum,
    products_core: &[f64],
    products_side: &[f64],
    tau_s: f64,
    tau_w: f64,
    freq_limits: Option<(f64, f64)>,
) -> Result<BinSets> {
    if tau_w > tau_s {
        return Err(Error::InvalidConfig(format!(
            "tau_w ({tau_w}) exceeds tau_s ({tau_s})"
        )));
    }
    let core = product_bins(s_r, products_core, freq_limits)?;
    let side = product_bins(s_r, products_side, freq_limits)?;
    let p = s_r.power_dbm();
    Ok(BinSets {
        b_strong: core.iter().copied().filter(|&k| p[k] >= tau_s).collect(),
        b_weak: core
            .iter()
            .copied()
            .filter(|&k| p[k] >= tau_w && p[k] < tau_s)
            .collect(),
        b_side: side.difference(&core).copied().collect(),
        b_core: core.into_iter().collect(),
        tau_s,
        tau_w,
        freq_limits,
    })
}

/// `w_s * ||S_p - S_r||` over the strong bins plus the one-sided
/// `w_w * ||max(0, S_p - S_r)||` over the weak bins, all in dBm.
pub fn spectral_loss(
    s_p: &Spectrum,
    s_r: &Spectrum,
    bins: &BinSets,
    w_s: f64,
    w_w: f64,
) -> Result<f64> {
    if !s_p.same_grid(s_r) {
        return Err(Error::GridMismatch);
    }
    let (p, r) = (s_p.power_dbm(), s_r.power_dbm());
    Ok(spectral_loss_dbm(|k| p[k], |k| r[k], bins, w_s, w_w))
}

pub(crate) fn spectral_loss_dbm(
    p: impl Fn(usize) -> f64,
    r: impl Fn(usize) -> f64,
    bins: &BinSets,
    w_s: f64,
    w_w: f64,
) -> f64 {
    let strong: f64 = bins.b_strong.iter().map(|&k| (p(k) - r(k)).powi(2)).sum();
    let weak: f64 = bins
        .b_weak
        .iter()
        .map(|&k| (p(k) - r(k)).max(0.0).powi(2))
        .sum();
    w_s * strong.sqrt() + w_w * weak.sqrt()
}
