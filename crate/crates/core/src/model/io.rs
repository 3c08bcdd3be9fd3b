//! JSON persistence of fitted models.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "core_if": [a1, a3, ...],
//!   "core_lo": [b1, b3, ...],
//!   "side_if": [g1, ...],
//!   "side_lo": [k1, ...],
//!   "phase": { "<bin>": [theta0, theta1, ...] },
//!   "bounds": { "core_if": [[lo, hi], ...], ... },
//!   "fit_metadata": { "seed": 7, ... }
//! }
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::mixer::{FitMetadata, MixerModel, ModelBounds};
use super::poly::{PhasePolynomial, PolynomialBlock};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    schema_version: u32,
    core_if: PolynomialBlock,
    core_lo: PolynomialBlock,
    side_if: PolynomialBlock,
    side_lo: PolynomialBlock,
    phase: BTreeMap<usize, PhasePolynomial>,
    bounds: ModelBounds,
    fit_metadata: FitMetadata,
}

/// Pretty JSON with a trailing newline. Floats use the shortest exact
/// representation, so save, load and save again gives the same bytes.
pub fn save_model(model: &MixerModel) -> String {
    let doc = ModelDocument {
        schema_version: MODEL_SCHEMA_VERSION,
        core_if: model.core_if().clone(),
        core_lo: model.core_lo().clone(),
        side_if: model.side_if().clone(),
        side_lo: model.side_lo().clone(),
        phase: model.phase().clone(),
        bounds: model.bounds().clone(),
        fit_metadata: model.fit_metadata().clone(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("model documents always serialize");
    s.push('\n');
    s
}

pub fn load_model(document: &str) -> Result<MixerModel> {
    let value: serde_json::Value = serde_json::from_str(document)?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or(Error::Schema {
            line: 1,
            message: "missing integer `schema_version`".into(),
        })?;
    if found != MODEL_SCHEMA_VERSION as u64 {
        return Err(Error::SchemaMismatch {
            found: found as u32,
            expected: MODEL_SCHEMA_VERSION,
        });
    }
    let doc: ModelDocument = serde_json::from_str(document)?;
    MixerModel::new(doc.core_if, doc.core_lo, doc.side_if, doc.side_lo)
        .with_phase(doc.phase)
        .with_metadata(doc.fit_metadata)
        .with_bounds(doc.bounds)
}
