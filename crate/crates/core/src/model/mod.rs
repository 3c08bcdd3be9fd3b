//! The multibox behavioral mixer.
//!
//! `s_rf = a(v_if) * b(v_lo) + gamma(v_if) + kappa(v_lo)` with every block
//! an odd polynomial, plus a spectral phase block that rotates fundamental
//! bins by a polynomial in the IF input power (dBm).

mod io;
mod mixer;
mod phase;
mod poly;
mod products;
mod sweep;

pub use io::{load_model, save_model, MODEL_SCHEMA_VERSION};
pub use mixer::{
    eval_mixer, Bound, FitMetadata, Mixer, MixerModel, ModelBounds, Weights, OCCUPIED_DBC,
    UNBOUNDED,
};
pub use phase::{apply_phase, FundamentalEntry, FundamentalMap, PhaseMode, Sideband};
pub use poly::{eval_poly, PhasePolynomial, PolynomialBlock};
pub use products::{enumerate_products, Product, ProductKind};
pub(crate) use sweep::check_grid;
pub use sweep::{
    fit_line, p1db, sweep_am_am, sweep_mixer, sweep_spectra, AmAmCurves, ToneSweep,
    TABLE1_MULTI_LO_HZ, TABLE1_SINGLE_LO_HZ,
};
