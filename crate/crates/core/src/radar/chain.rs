use std::f64::consts::TAU;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scenario::{RadarScenario, Target};
use crate::dsp;
use crate::error::{Error, Result};
use crate::model::Mixer;
use crate::signals::{
    dbm_to_watts, demodulate_symbols, require_grid_index, synth_multitone, Port, SampledSignal,
    Tone, ToneSet,
};

/// Drive one mixer with the OFDM IF and the whole LO comb.
pub fn comb_upconvert(
    if_signal: &SampledSignal,
    lo_tones: &ToneSet,
    mixer: &dyn Mixer,
    ref_impedance: f64,
) -> Result<SampledSignal> {
    let lo = synth_multitone(lo_tones, if_signal.sample_rate(), if_signal.len())?;
    mixer.mix(if_signal, &lo, ref_impedance)
}

/// Receiver white noise: one-sided density in dBm/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub density_dbm_hz: f64,
    pub seed: u64,
    pub ref_impedance: f64,
}

/// Delay-Doppler channel. Each echo is the analytic signal delayed by a
/// spectral phase ramp and shifted in frequency by the target Doppler, then
/// realified. Dopplers are the shifts seen at `carrier_for_doppler`; the
/// whole record is shifted by the same amount.
pub fn apply_channel(
    rf: &SampledSignal,
    targets: &[Target],
    carrier_for_doppler: f64,
    noise: Option<&NoiseSpec>,
) -> Result<SampledSignal> {
    let n = rf.len();
    let fs = rf.sample_rate();
    if !(carrier_for_doppler > 0.0 && carrier_for_doppler < fs / 2.0) {
        return Err(Error::Undersampled {
            frequency: carrier_for_doppler,
            sample_rate: fs,
        });
    }
    let mut out = vec![0.0; n];
    if !targets.is_empty() {
        let spectrum = dsp::fft_real(rf.samples());
        let half = n.div_ceil(2);
        for t in targets {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for (k, b) in buf.iter_mut().enumerate() {
                let weight = if k == 0 || (n % 2 == 0 && k == n / 2) {
                    1.0
                } else if k < half {
                    2.0
                } else {
                    continue;
                };
                let f = k as f64 * fs / n as f64;
                *b = spectrum[k] * weight * Complex64::from_polar(1.0, -TAU * f * t.delay);
            }
            let z = dsp::ifft_normalized(buf);
            let step = TAU * t.doppler / fs;
            for (i, (o, zi)) in out.iter_mut().zip(z).enumerate() {
                *o += t.gain * (zi * Complex64::from_polar(1.0, step * i as f64)).re;
            }
        }
    }
    if let Some(spec) = noise {
        let variance = spec.ref_impedance * dbm_to_watts(spec.density_dbm_hz) * fs / 2.0;
        let normal = Normal::new(0.0, variance.sqrt())
            .map_err(|e| Error::InvalidConfig(format!("noise density: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for o in out.iter_mut() {
            *o += normal.sample(&mut rng);
        }
    }
    SampledSignal::new(fs, out)
}

/// Reject scenarios whose processed copy shares spectrum with another copy.
pub fn check_band_selection(scenario: &RadarScenario) -> Result<()> {
    let cfg = &scenario.frame_config;
    let b = cfg.bandwidth;
    let sel = scenario.selected_tone();
    let center = scenario.processed_center();
    if center + b / 2.0 >= scenario.sample_rate / 2.0 {
        return Err(Error::BandOverlap(format!(
            "copy at {center} Hz does not fit below Nyquist at {} S/s",
            scenario.sample_rate
        )));
    }
    for (j, tone) in scenario.lo_tones.tones().iter().enumerate() {
        for (sign, name) in [(1.0, "upper"), (-1.0, "lower")] {
            if j == sel && sign > 0.0 {
                continue;
            }
            let other = tone.frequency() + sign * cfg.carrier_if;
            if (other - center).abs() < b - 1e-6 {
                return Err(Error::BandOverlap(format!(
                    "{name} copy of LO {} Hz at {other} Hz overlaps the processed copy at {center} Hz",
                    tone.frequency()
                )));
            }
        }
    }
    Ok(())
}

/// Signed bins `[-L/2, L/2)` around bin `kc` of a full DFT, rescaled to the
/// frame baseband. `up` is the oversampling ratio of the record.
fn pick_band(
    spectrum: &[Complex64],
    kc: usize,
    frame_len: usize,
    up: usize,
) -> Result<Vec<Complex64>> {
    let half = (frame_len / 2) as i64;
    if (kc as i64) < half || kc as i64 + half > spectrum.len() as i64 / 2 {
        return Err(Error::BandOverlap(
            "processed band leaves the record spectrum".into(),
        ));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); frame_len];
    let scale = 2.0 / up as f64;
    for s in -half..half {
        x[dsp::wrap_index(s, frame_len)] = spectrum[(kc as i64 + s) as usize] * scale;
    }
    Ok(x)
}

/// Bring the processed copy to baseband and return the demodulated
/// `subcarriers x symbols` grid (raw, not equalized).
///
/// With an ideal receiver the copy is selected directly by its DFT bins. A
/// model or surrogate receiver first band-limits the record to the copy,
/// mixes it with a single LO tone and then selects the IF copy the same way.
pub fn downconvert_and_demod(
    rf: &SampledSignal,
    scenario: &RadarScenario,
) -> Result<Array2<Complex64>> {
    scenario.validate()?;
    check_band_selection(scenario)?;
    let cfg = &scenario.frame_config;
    let l = cfg.frame_len();
    let n = rf.len();
    if n % l != 0 {
        return Err(Error::LengthMismatch(n, l * (n / l).max(1)));
    }
    let up = n / l;
    let bin_step = rf.grid_base();
    let center = scenario.processed_center();
    let kc_rf = require_grid_index(center, bin_step)?;

    let full = dsp::fft_real(rf.samples());
    let baseband = if scenario.rx_conversion.is_ideal() {
        pick_band(&full, kc_rf, l, up)?
    } else {
        let lo = scenario.lo_tones.tones()[scenario.selected_tone()];
        let band = pick_band(&full, kc_rf, l, up)?;
        let mut pre = vec![Complex64::new(0.0, 0.0); n];
        let half = (l / 2) as i64;
        for s in -half..half {
            let v = band[dsp::wrap_index(s, l)] * (up as f64 / 2.0);
            let k = (kc_rf as i64 + s) as usize;
            pre[k] = v;
            pre[n - k] = v.conj();
        }
        let pre = dsp::ifft_normalized(pre)
            .into_iter()
            .map(|z| z.re)
            .collect();
        let pre = SampledSignal::new(rf.sample_rate(), pre)?;
        let lo_set = ToneSet::new(
            Port::Lo,
            vec![Tone::new(lo.frequency(), lo.amplitude(), lo.phase())?],
        )?;
        let lo_sig = synth_multitone(&lo_set, rf.sample_rate(), n)?;
        let mixed = scenario
            .rx_conversion
            .mix(&pre, &lo_sig, cfg.ref_impedance)?;
        let kc_if = require_grid_index(cfg.carrier_if, bin_step)?;
        pick_band(&dsp::fft_real(mixed.samples()), kc_if, l, up)?
    };
    let bb = dsp::ifft_normalized(baseband);
    demodulate_symbols(&bb, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MixerModel;
    use crate::radar::{MixerChoice, RadarScenario};
    use crate::signals::{compute_spectrum, generate_ofdm_frame, upconvert_to_if, OfdmFrameConfig};

    fn small_scenario() -> RadarScenario {
        let mut s = RadarScenario::table2(MixerChoice::Ideal);
        s.frame_config = OfdmFrameConfig {
            subcarriers: 64,
            cp_length: 8,
            symbols: 8,
            ..OfdmFrameConfig::table2(5)
        };
        s.sample_rate = 32e9;
        s.targets.clear();
        s
    }

    fn grid_evm(got: &Array2<Complex64>, want: &Array2<Complex64>, scale: f64) -> f64 {
        let err: f64 = got
            .iter()
            .zip(want)
            .map(|(g, w)| (g / scale - w).norm_sqr())
            .sum();
        (err / want.len() as f64).sqrt()
    }

    #[test]
    fn ideal_comb_copies_have_equal_power() {
        let s = RadarScenario::table2(MixerChoice::Ideal);
        let frame = generate_ofdm_frame(&s.frame_config).unwrap();
        let x = upconvert_to_if(&frame, s.sample_rate).unwrap();
        let rf = comb_upconvert(&x, &s.lo_tones, &s.tx_mixer, 50.0).unwrap();
        let spec = compute_spectrum(&rf, 50.0);
        let band = |c: f64| {
            let k0 = spec.bin_index(c - 250e6).unwrap();
            let k1 = spec.bin_index(c + 250e6).unwrap();
            (k0..k1)
                .map(|k| spec.bin_watts(k, spec.bins()[k]))
                .sum::<f64>()
        };
        let (p0, p1) = (band(10e9), band(10.5e9));
        assert!((10.0 * (p0 / p1).log10()).abs() < 0.01);
        // nothing is left between the copies and the lower sidebands
        let gap = spec.bin_index(9.625e9).unwrap();
        assert!(spec.bins()[gap].norm() < 1e-12);
    }

    #[test]
    fn zero_lo_leaves_if_leakage_only() {
        let s = small_scenario();
        let frame = generate_ofdm_frame(&s.frame_config).unwrap();
        let x = upconvert_to_if(&frame, s.sample_rate).unwrap();
        let silent = ToneSet::new(Port::Lo, vec![Tone::new(9e9, 0.0, 0.0).unwrap()]).unwrap();
        let dev = crate::oracle::SurrogateDevice::default();
        let rf = comb_upconvert(&x, &silent, &dev, 50.0).unwrap();
        for (a, b) in rf.samples().iter().zip(x.samples()) {
            assert!((a - dev.if_leak * b).abs() < 1e-15);
        }
    }

    #[test]
    fn whole_sample_delay_is_circular_shift() {
        let x = SampledSignal::new(
            8.0,
            (0..64).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect(),
        )
        .unwrap();
        let y = apply_channel(&x, &[Target::new(1.0 / 8.0, 0.0, 1.0)], 1.0, None).unwrap();
        for i in 0..64 {
            assert!(
                (y.samples()[i] - x.samples()[(i + 63) % 64]).abs() < 1e-12,
                "sample {i}"
            );
        }
        let none = apply_channel(&x, &[], 1.0, None).unwrap();
        assert!(none.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn channel_is_linear_in_targets() {
        let x = SampledSignal::new(
            64.0,
            (0..256).map(|i| (i as f64 * 0.37).sin() + 0.2).collect(),
        )
        .unwrap();
        let t1 = Target::new(0.013, 0.4, 1.0);
        let t2 = Target::new(0.051, -0.2, 0.7);
        let both = apply_channel(&x, &[t1, t2], 10.0, None).unwrap();
        let a = apply_channel(&x, &[t1], 10.0, None).unwrap();
        let b = apply_channel(&x, &[t2], 10.0, None).unwrap();
        for i in 0..256 {
            assert!((both.samples()[i] - a.samples()[i] - b.samples()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_has_requested_density() {
        let x = SampledSignal::zeros(1e9, 200_000).unwrap();
        let spec = NoiseSpec {
            density_dbm_hz: -100.0,
            seed: 3,
            ref_impedance: 50.0,
        };
        let y = apply_channel(&x, &[], 1e8, Some(&spec)).unwrap();
        let p = crate::signals::mean_power_dbm(y.samples(), 50.0);
        // -100 dBm/Hz over 500 MHz
        assert!((p - (-100.0 + 10.0 * 5e8f64.log10())).abs() < 0.05, "{p}");
        let again = apply_channel(&x, &[], 1e8, Some(&spec)).unwrap();
        assert_eq!(y, again);
    }

    #[test]
    fn loopback_recovers_grid() {
        let s = small_scenario();
        let frame = generate_ofdm_frame(&s.frame_config).unwrap();
        let x = upconvert_to_if(&frame, s.sample_rate).unwrap();
        let rf = comb_upconvert(&x, &s.lo_tones, &s.tx_mixer, 50.0).unwrap();
        let f_rx = downconvert_and_demod(&rf, &s).unwrap();
        let a_lo = s.lo_tones.tones()[0].amplitude();
        let evm = grid_evm(&f_rx, frame.grid(), frame.amplitude_scale() * a_lo / 2.0);
        assert!(evm < 1e-9, "evm {evm}");
    }

    #[test]
    fn model_receiver_with_ideal_multiplier_loops_back() {
        let mut s = small_scenario();
        s.rx_conversion = MixerChoice::Model(MixerModel::ideal());
        let frame = generate_ofdm_frame(&s.frame_config).unwrap();
        let x = upconvert_to_if(&frame, s.sample_rate).unwrap();
        let rf = comb_upconvert(&x, &s.lo_tones, &s.tx_mixer, 50.0).unwrap();
        let f_rx = downconvert_and_demod(&rf, &s).unwrap();
        let a_lo = s.lo_tones.tones()[0].amplitude();
        let evm = grid_evm(
            &f_rx,
            frame.grid(),
            frame.amplitude_scale() * a_lo * a_lo / 4.0,
        );
        assert!(evm < 1e-9, "evm {evm}");
    }

    #[test]
    fn delay_gives_linear_phase_across_subcarriers() {
        let s = small_scenario();
        let cfg = &s.frame_config;
        let frame = generate_ofdm_frame(cfg).unwrap();
        let x = upconvert_to_if(&frame, s.sample_rate).unwrap();
        let rf = comb_upconvert(&x, &s.lo_tones, &s.tx_mixer, 50.0).unwrap();
        let tau = 1.0 / cfg.bandwidth;
        let echo = apply_channel(&rf, &[Target::new(tau, 0.0, 1.0)], 10e9, None).unwrap();
        let f_rx = downconvert_and_demod(&echo, &s).unwrap();
        let d: Vec<Complex64> = (0..cfg.subcarriers)
            .map(|n| f_rx[(n, 0)] / frame.grid()[(n, 0)])
            .collect();
        let want = -TAU * cfg.subcarrier_spacing() * tau;
        for n in 1..cfg.subcarriers {
            let step = (d[n] / d[n - 1]).arg();
            assert!(
                (step - want).abs() < 1e-9,
                "subcarrier {n}: {step} vs {want}"
            );
        }
    }

    #[test]
    fn overlapping_comb_is_rejected() {
        let mut s = small_scenario();
        s.lo_tones = ToneSet::equal_power(Port::Lo, &[9e9, 9.25e9], 0.0, 50.0).unwrap();
        let rf = SampledSignal::zeros(s.sample_rate, s.frame_config.frame_len() * 64).unwrap();
        assert!(matches!(
            downconvert_and_demod(&rf, &s),
            Err(Error::BandOverlap(_))
        ));
    }
}
