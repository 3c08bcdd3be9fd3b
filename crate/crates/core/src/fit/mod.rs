//! Staged model fitting against a reference dataset.
//!
//! 1. Core: multi-start bounded simplex search over `[a; b]` minimizing the
//!    fundamental and IM3 curve errors plus the spectral loss at `p_in_ref`.
//! 2. Sidebranch: `gamma` and `kappa` against the sidebranch bins, with the
//!    core frozen.
//! 3. Phase: per-bin least-squares polynomials through the phase curves.

mod algorithm;
mod bins;
mod config;
mod context;
mod core;
mod nm;
mod phase;
mod report;
mod side;

pub use algorithm::{reference_bins, run_algorithm1};
pub use bins::{select_bins, spectral_loss, BinSets};
pub use config::{FitConfig, SideResidual};
pub use context::FitContext;
pub use core::{core_objective, fit_core, linear_start, CoreFit, ObjectiveTerms, StartReport};
pub use nm::{minimize, BoxMap, NmOptions, NmOutcome};
pub use phase::{fit_phase, fit_phase_curve, PhaseFit};
pub use report::{FinalLosses, FitReport};
pub use side::{fit_sidebranch, side_objective, SideFit};
