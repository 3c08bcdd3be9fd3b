//! Behavioral modeling of mixers driven by multi-tone LO signals.
//!
//! The crate is organized bottom-up:
//! - [`signals`]: tone and OFDM synthesis, coherent spectra, power and PAPR;
//! - [`model`]: the multibox mixer (polynomial cores around an ideal
//!   multiplier, additive sidebranches, power-dependent phase block);
//! - [`oracle`]: a saturating surrogate device and reference datasets;
//! - [`fit`]: the staged core / sidebranch / phase fitting procedure;
//! - [`radar`]: frequency-comb OFDM radar processing and image metrics.

pub mod dsp;
pub mod error;
pub mod fit;
pub mod model;
pub mod oracle;
pub mod radar;
pub mod signals;

pub use error::{Error, Result};

/// Format with 17 significant digits; parses back to the identical `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
