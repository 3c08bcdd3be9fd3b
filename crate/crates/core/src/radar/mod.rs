//! Frequency-comb OFDM radar: one mixer drives the OFDM IF with a multi-tone
//! LO, a delay-Doppler channel returns the echoes, and one comb copy is
//! brought back to baseband for spectral-division range-Doppler processing.

mod chain;
mod metrics;
mod rdm;
mod run;
mod scenario;

pub use chain::{
    apply_channel, check_band_selection, comb_upconvert, downconvert_and_demod, NoiseSpec,
};
pub use metrics::{cut_sidelobes, image_metrics, RadarMetrics};
pub use rdm::{
    range_doppler, range_doppler_complex, RangeDopplerMap, MAP_FLOOR_DB, SPEED_OF_LIGHT,
};
pub use run::{run_scenario, RadarRun};
pub use scenario::{
    default_targets, MixerChoice, MixerSpec, ProcessedBand, RadarConfig, RadarScenario, Target,
    TABLE2_LO_HZ,
};
