//! Multi-tone and OFDM synthesis, coherent spectra and power bookkeeping.
//!
//! Conventions used everywhere else in the crate:
//! - spectra are one-sided and report peak tone amplitude; dBm divides by
//!   the square root of two once;
//! - every tone and subcarrier must land exactly on a DFT bin of the record;
//! - the default reference impedance is 50 ohm and empty bins read -200 dBm.

mod csv;
mod ofdm;
mod power;
mod sampled;
mod spectrum;
mod tone;

pub(crate) use csv::{parse_bin_row, parse_number, write_spectrum_rows, Header};
pub use csv::{read_signal_csv, read_spectrum_csv, write_signal_csv, write_spectrum_csv};
pub use ofdm::{
    demodulate_symbols, generate_ofdm_frame, qpsk_grid, upconvert_to_if, Constellation, OfdmFrame,
    OfdmFrameConfig,
};
pub use power::{
    amplitude_to_dbm, dbm_to_amplitude, dbm_to_watts, mean_power_dbm, papr_complex_db,
    papr_real_db, watts_to_dbm, PaprConvention,
};
pub(crate) use sampled::require_grid_index;
pub use sampled::{grid_index, synth_multitone, SampledSignal};
pub use spectrum::{compute_spectrum, compute_spectrum_with_floor, Spectrum};
pub use tone::{input_power_dbm, per_tone_amplitude, Port, Tone, ToneSet};

pub const DEFAULT_REF_IMPEDANCE: f64 = 50.0;
pub const DEFAULT_FLOOR_DBM: f64 = -200.0;
