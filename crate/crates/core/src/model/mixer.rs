use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::phase::{apply_phase, FundamentalMap, PhaseMode, Sideband};
use super::poly::{PhasePolynomial, PolynomialBlock};
use crate::error::{Error, Result};
use crate::signals::{compute_spectrum, mean_power_dbm, SampledSignal, Spectrum};

/// Closed interval `[lower, upper]` for one coefficient.
pub type Bound = (f64, f64);

pub const UNBOUNDED: Bound = (-f64::MAX, f64::MAX);

/// Box constraints, one pair per coefficient of each block.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBounds {
    pub core_if: Vec<Bound>,
    pub core_lo: Vec<Bound>,
    pub side_if: Vec<Bound>,
    pub side_lo: Vec<Bound>,
}

impl ModelBounds {
    pub(crate) fn blocks(&self) -> [(&'static str, &[Bound]); 4] {
        [
            ("core_if", &self.core_if),
            ("core_lo", &self.core_lo),
            ("side_if", &self.side_if),
            ("side_lo", &self.side_lo),
        ]
    }
}

/// Curve and spectral weights of the core objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub w_f: f64,
    pub w_im3: f64,
    pub w_s: f64,
    pub w_w: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            w_f: 1.0,
            w_im3: 1.0,
            w_s: 1.0,
            w_w: 1.0,
        }
    }
}

/// Where a fitted model came from. Everything is optional so hand-built
/// models serialize cleanly.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitMetadata {
    pub seed: Option<u64>,
    pub n_starts: Option<usize>,
    pub weights: Option<Weights>,
    pub tau_s_dbm: Option<f64>,
    pub tau_w_dbm: Option<f64>,
    pub p_in_ref_dbm: Option<f64>,
    /// Bin step of the grid the `phase` keys refer to.
    pub bin_step_hz: Option<f64>,
    pub ref_impedance_ohms: Option<f64>,
    pub objective: Option<f64>,
    pub tool_version: Option<String>,
    pub timestamp: Option<String>,
}

/// Multibox mixer: `a(v_if) * b(v_lo) + gamma(v_if) + kappa(v_lo)`, followed
/// by a power dependent rotation of the fundamental bins.
#[derive(Debug, Clone, PartialEq)]
pub struct MixerModel {
    core_if: PolynomialBlock,
    core_lo: PolynomialBlock,
    side_if: PolynomialBlock,
    side_lo: PolynomialBlock,
    phase: BTreeMap<usize, PhasePolynomial>,
    bounds: ModelBounds,
    fit_metadata: FitMetadata,
}

impl MixerModel {
    pub fn new(
        core_if: PolynomialBlock,
        core_lo: PolynomialBlock,
        side_if: PolynomialBlock,
        side_lo: PolynomialBlock,
    ) -> Self {
        let bounds = ModelBounds {
            core_if: vec![UNBOUNDED; core_if.len()],
            core_lo: vec![UNBOUNDED; core_lo.len()],
            side_if: vec![UNBOUNDED; side_if.len()],
            side_lo: vec![UNBOUNDED; side_lo.len()],
        };
        Self {
            core_if,
            core_lo,
            side_if,
            side_lo,
            phase: BTreeMap::new(),
            bounds,
            fit_metadata: FitMetadata::default(),
        }
    }

    /// Plain multiplier `v_if * v_lo`.
    pub fn ideal() -> Self {
        Self::new(
            PolynomialBlock::linear(1.0),
            PolynomialBlock::linear(1.0),
            PolynomialBlock::default(),
            PolynomialBlock::default(),
        )
    }

    pub fn with_bounds(mut self, bounds: ModelBounds) -> Result<Self> {
        self.bounds = bounds;
        self.check_bounds()?;
        Ok(self)
    }

    pub fn with_phase(mut self, phase: BTreeMap<usize, PhasePolynomial>) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_metadata(mut self, fit_metadata: FitMetadata) -> Self {
        self.fit_metadata = fit_metadata;
        self
    }

    pub fn core_if(&self) -> &PolynomialBlock {
        &self.core_if
    }

    pub fn core_lo(&self) -> &PolynomialBlock {
        &self.core_lo
    }

    pub fn side_if(&self) -> &PolynomialBlock {
        &self.side_if
    }

    pub fn side_lo(&self) -> &PolynomialBlock {
        &self.side_lo
    }

    pub fn phase(&self) -> &BTreeMap<usize, PhasePolynomial> {
        &self.phase
    }

    pub fn bounds(&self) -> &ModelBounds {
        &self.bounds
    }

    pub fn fit_metadata(&self) -> &FitMetadata {
        &self.fit_metadata
    }

    pub(crate) fn blocks(&self) -> [(&'static str, &PolynomialBlock); 4] {
        [
            ("core_if", &self.core_if),
            ("core_lo", &self.core_lo),
            ("side_if", &self.side_if),
            ("side_lo", &self.side_lo),
        ]
    }

    /// Every coefficient must have a bound pair and lie inside it.
    pub fn check_bounds(&self) -> Result<()> {
        for ((name, block), (_, bounds)) in self.blocks().into_iter().zip(self.bounds.blocks()) {
            if block.len() != bounds.len() {
                return Err(Error::InvalidConfig(format!(
                    "{name} has {} coefficients but {} bound pairs",
                    block.len(),
                    bounds.len()
                )));
            }
            for (index, (&value, &(lower, upper))) in
                block.coefficients().iter().zip(bounds).enumerate()
            {
                if !value.is_finite() || !(lower <= value && value <= upper) {
                    return Err(Error::BoundViolation {
                        block: name.to_string(),
                        index,
                        value,
                        lower,
                        upper,
                    });
                }
            }
        }
        Ok(())
    }

    /// Mean of all stored phase polynomials; used when the target grid does
    /// not match the one the phase map was fitted on.
    pub fn uniform_phase(&self) -> Option<PhasePolynomial> {
        PhasePolynomial::mean(self.phase.values())
    }

    /// Phase polynomial per bin of `fund`: the stored one when the grid
    /// matches the fitted grid, the uniform mean otherwise.
    pub(crate) fn phase_for_grid(
        &self,
        fund: &FundamentalMap,
        bin_step: f64,
    ) -> BTreeMap<usize, PhasePolynomial> {
        let same_grid = self
            .fit_metadata
            .bin_step_hz
            .is_some_and(|b| (b - bin_step).abs() <= 1e-9 * bin_step);
        let uniform = self.uniform_phase();
        fund.entries()
            .iter()
            .filter_map(|e| {
                let p = if same_grid {
                    self.phase.get(&e.bin).cloned().or_else(|| uniform.clone())
                } else {
                    uniform.clone()
                };
                p.map(|p| (e.bin, p))
            })
            .collect()
    }
}

/// Time-domain mixer output without the phase block.
pub fn eval_mixer(
    model: &MixerModel,
    v_if: &SampledSignal,
    v_lo: &SampledSignal,
) -> Result<SampledSignal> {
    v_if.check_compatible(v_lo)?;
    let samples = v_if
        .samples()
        .iter()
        .zip(v_lo.samples())
        .map(|(&x, &l)| {
            model.core_if.eval(x) * model.core_lo.eval(l)
                + model.side_if.eval(x)
                + model.side_lo.eval(l)
        })
        .collect();
    SampledSignal::new(v_if.sample_rate(), samples)
}

/// Anything that turns an IF and an LO record into an RF record.
pub trait Mixer: Send + Sync {
    /// Output spectrum, including any spectral phase behavior.
    fn mix_spectrum(
        &self,
        v_if: &SampledSignal,
        v_lo: &SampledSignal,
        ref_impedance: f64,
    ) -> Result<Spectrum>;

    fn mix(
        &self,
        v_if: &SampledSignal,
        v_lo: &SampledSignal,
        ref_impedance: f64,
    ) -> Result<SampledSignal> {
        self.mix_spectrum(v_if, v_lo, ref_impedance)?.to_signal()
    }
}

/// Threshold, relative to the strongest bin, for treating an input bin as
/// occupied when locating fundamentals automatically.
pub const OCCUPIED_DBC: f64 = -160.0;

impl Mixer for MixerModel {
    fn mix_spectrum(&self, v_if: &SampledSignal, v_lo: &SampledSignal, r: f64) -> Result<Spectrum> {
        let out = compute_spectrum(&eval_mixer(self, v_if, v_lo)?, r);
        if self.phase.is_empty() {
            return Ok(out);
        }
        let fund = FundamentalMap::detect(
            &compute_spectrum(v_if, r),
            &compute_spectrum(v_lo, r),
            Sideband::Upper,
            OCCUPIED_DBC,
        );
        let phased = self
            .clone()
            .with_phase(self.phase_for_grid(&fund, out.bin_step()));
        apply_phase(
            &phased,
            &out,
            &fund,
            mean_power_dbm(v_if.samples(), r),
            PhaseMode::Lenient,
        )
    }

    fn mix(&self, v_if: &SampledSignal, v_lo: &SampledSignal, r: f64) -> Result<SampledSignal> {
        if self.phase.is_empty() {
            eval_mixer(self, v_if, v_lo)
        } else {
            self.mix_spectrum(v_if, v_lo, r)?.to_signal()
        }
    }
}
