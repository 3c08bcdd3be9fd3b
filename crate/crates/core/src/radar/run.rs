use ndarray::Array2;
use num_complex::Complex64;

use super::chain::{apply_channel, comb_upconvert, downconvert_and_demod, NoiseSpec};
use super::metrics::{image_metrics, RadarMetrics};
use super::rdm::{range_doppler, RangeDopplerMap};
use super::scenario::RadarScenario;
use crate::error::Result;
use crate::signals::{generate_ofdm_frame, upconvert_to_if};

#[derive(Debug, Clone)]
pub struct RadarRun {
    pub rdm: RangeDopplerMap,
    pub metrics: RadarMetrics,
    pub f_tx: Array2<Complex64>,
    pub f_rx: Array2<Complex64>,
}

/// Frame, comb upconversion, channel, receiver, image and metrics.
pub fn run_scenario(scenario: &RadarScenario) -> Result<RadarRun> {
    scenario.validate()?;
    let cfg = &scenario.frame_config;
    let frame = generate_ofdm_frame(cfg)?;
    let x = upconvert_to_if(&frame, scenario.sample_rate)?;
    let rf = comb_upconvert(
        &x,
        &scenario.lo_tones,
        &scenario.tx_mixer,
        cfg.ref_impedance,
    )?;
    let noise = scenario.noise_floor.map(|density_dbm_hz| NoiseSpec {
        density_dbm_hz,
        seed: scenario.noise_seed,
        ref_impedance: cfg.ref_impedance,
    });
    let echo = apply_channel(
        &rf,
        &scenario.targets,
        scenario.processed_center(),
        noise.as_ref(),
    )?;
    let f_rx = downconvert_and_demod(&echo, scenario)?;
    let f_tx = frame.grid().clone();
    let rdm = range_doppler(&f_tx, &f_rx, scenario.zero_pad, cfg)?;
    let metrics = image_metrics(&rdm, scenario.targets.len(), scenario.mask_half_widths())?;
    Ok(RadarRun {
        rdm,
        metrics,
        f_tx,
        f_rx,
    })
}
