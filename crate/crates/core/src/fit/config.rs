use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bound, ModelBounds, Weights};

/// Residual used by the sidebranch stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideResidual {
    /// dBm difference per bin, as the loss is written.
    #[default]
    Dbm,
    /// Magnitude of the complex bin difference.
    ComplexLinear,
}

/// Fitting parameters. Every field maps to a key of the TOML config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Number of odd orders in each core block.
    pub k_core: usize,
    /// Number of odd orders in each sidebranch block.
    pub k_side: usize,
    /// LO sidebranch length when it differs from `k_side`.
    #[serde(default)]
    pub k_side_lo: Option<usize>,
    /// Phase polynomial coefficient count; 0 skips the phase stage.
    pub n_phase: usize,
    pub weights: Weights,
    pub tau_s: f64,
    pub tau_w: f64,
    #[serde(default)]
    pub freq_limits: Option<(f64, f64)>,
    pub bounds: ModelBounds,
    pub n_starts: usize,
    pub seed: u64,
    #[serde(default)]
    pub lambda: f64,
    pub tolerance: f64,
    pub max_evals: usize,
    #[serde(default)]
    pub side_residual: SideResidual,
}

impl FitConfig {
    /// Defaults sized for the two-tone characterization setups.
    pub fn table1() -> Self {
        Self {
            k_core: 2,
            k_side: 2,
            k_side_lo: None,
            n_phase: 4,
            weights: Weights::default(),
            tau_s: -60.0,
            tau_w: -90.0,
            freq_limits: Some((4e9, 14e9)),
            bounds: ModelBounds {
                core_if: vec![(0.0, 10.0), (-200.0, 200.0)],
                core_lo: vec![(0.0, 10.0), (-50.0, 50.0)],
                side_if: vec![(-1.0, 1.0), (-50.0, 50.0)],
                side_lo: vec![(-1.0, 1.0), (-50.0, 50.0)],
            },
            n_starts: 8,
            seed: 1,
            lambda: 0.0,
            tolerance: 1e-10,
            max_evals: 4000,
            side_residual: SideResidual::Dbm,
        }
    }

    /// Table I settings with fifth-order cores. A cubic core cannot follow
    /// the limiter of the surrogate on the combined IF/LO products.
    pub fn surrogate() -> Self {
        let mut cfg = Self::table1();
        cfg.k_core = 3;
        cfg.bounds.core_if.push((-2000.0, 2000.0));
        cfg.bounds.core_lo.push((-200.0, 200.0));
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("fit configs always serialize")
    }

    pub fn k_side_if(&self) -> usize {
        self.k_side
    }

    pub fn k_side_lo(&self) -> usize {
        self.k_side_lo.unwrap_or(self.k_side)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.k_core == 0 {
            return bad("k_core must be at least 1".into());
        }
        if self.n_starts == 0 {
            return bad("n_starts must be at least 1".into());
        }
        if self.max_evals == 0 {
            return bad("max_evals must be at least 1".into());
        }
        let w = self.weights;
        if [w.w_f, w.w_im3, w.w_s, w.w_w, self.lambda]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return bad("weights and lambda must be finite and non-negative".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative".into());
        }
        if self.tau_w > self.tau_s {
            return bad(format!(
                "tau_w ({}) exceeds tau_s ({})",
                self.tau_w, self.tau_s
            ));
        }
        if let Some((lo, hi)) = self.freq_limits {
            if !(lo < hi) {
                return bad("freq_limits must be an increasing pair".into());
            }
        }
        let expect = [
            ("core_if", self.k_core),
            ("core_lo", self.k_core),
            ("side_if", self.k_side_if()),
            ("side_lo", self.k_side_lo()),
        ];
        for ((name, bounds), (_, n)) in self.bounds.blocks().into_iter().zip(expect) {
            if bounds.len() != n {
                return bad(format!(
                    "bounds.{name} needs {n} pairs, has {}",
                    bounds.len()
                ));
            }
            if let Some((i, _)) = bounds
                .iter()
                .enumerate()
                .find(|(_, b)| !(b.0.is_finite() && b.1.is_finite() && b.0 <= b.1))
            {
                return bad(format!(
                    "bounds.{name}[{i}] must be finite with lower <= upper"
                ));
            }
        }
        Ok(())
    }

    /// Bounds of `[a; b]` in search order.
    pub(crate) fn core_bounds(&self) -> Vec<Bound> {
        self.bounds
            .core_if
            .iter()
            .chain(&self.bounds.core_lo)
            .copied()
            .collect()
    }

    /// Bounds of `[gamma; kappa]` in search order.
    pub(crate) fn side_bounds(&self) -> Vec<Bound> {
        self.bounds
            .side_if
            .iter()
            .chain(&self.bounds.side_lo)
            .copied()
            .collect()
    }
}
