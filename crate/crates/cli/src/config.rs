use std::path::Path;

use multibox::model::ToneSweep;
use multibox::radar::MixerSpec;
use serde::Deserialize;

use crate::failure::{Failure, Outcome};

/// Power grid as a `start:step:stop` string or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PowerGrid {
    Range(String),
    List(Vec<f64>),
}

impl PowerGrid {
    pub fn points(&self) -> Outcome<Vec<f64>> {
        match self {
            PowerGrid::Range(s) => parse_range(s),
            PowerGrid::List(v) => Ok(v.clone()),
        }
    }
}

/// Parse `start:step:stop` into an inclusive grid.
pub fn parse_range(text: &str) -> Outcome<Vec<f64>> {
    let bad = |why: &str| Failure::invalid(format!("power grid `{text}`: {why}"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:step:stop"));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("`{p}` is not a number")))?;
        if !slot.is_finite() {
            return Err(bad("values must be finite"));
        }
    }
    let [start, step, stop] = v;
    if step <= 0.0 {
        return Err(bad("step must be positive"));
    }
    if stop < start {
        return Err(bad("stop lies below start"));
    }
    let n = ((stop - start) / step).round();
    if (start + n * step - stop).abs() > 1e-9 * step.max(1.0) {
        return Err(bad("stop is not reached by whole steps"));
    }
    Ok((0..=n as usize).map(|i| start + step * i as f64).collect())
}

/// Characterization run layout.
///
/// ```toml
/// p_in_ref_dbm = -10.0
/// power_grid = "-30:1:0"
/// [device]
/// kind = "surrogate_file"
/// path = "surrogate.toml"
/// [sweep]
/// # ToneSweep fields
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizeConfig {
    pub p_in_ref_dbm: f64,
    pub power_grid: PowerGrid,
    pub device: MixerSpec,
    pub sweep: ToneSweep,
}

impl CharacterizeConfig {
    pub fn from_toml(text: &str) -> Outcome<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// Directory that relative paths inside `config` resolve against.
pub fn base_dir(config: &Path) -> &Path {
    config.parent().unwrap_or(Path::new("."))
}
