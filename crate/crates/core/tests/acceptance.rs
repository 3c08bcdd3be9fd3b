//! End-to-end acceptance suite. Every check prints one PASS/FAIL line.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use multibox::fit::{run_algorithm1, select_bins, spectral_loss, BinSets, FitConfig, FitReport};
use multibox::model::{
    eval_mixer, p1db, save_model, sweep_mixer, Mixer, MixerModel, PolynomialBlock, ToneSweep,
    TABLE1_MULTI_LO_HZ, TABLE1_SINGLE_LO_HZ,
};
use multibox::oracle::{characterize, ReferenceDataset, SurrogateDevice};
use multibox::radar::{
    cut_sidelobes, range_doppler, run_scenario, MixerChoice, RadarRun, RadarScenario, Target,
};
use multibox::signals::{
    compute_spectrum, dbm_to_amplitude, generate_ofdm_frame, papr_real_db, synth_multitone,
    upconvert_to_if, OfdmFrameConfig, PaprConvention, Port, Spectrum, Tone, ToneSet,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn report(id: u32, name: &str, pass: bool, detail: String, elapsed: Duration) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!(
        "[{id:>2}] {verdict} {name}: {detail} ({:.2} s)",
        elapsed.as_secs_f64()
    );
}

fn multi_lo() -> ToneSweep {
    ToneSweep::table1(&TABLE1_MULTI_LO_HZ).unwrap()
}

fn single_lo() -> ToneSweep {
    ToneSweep::table1(&TABLE1_SINGLE_LO_HZ).unwrap()
}

fn self_consistency_truth() -> MixerModel {
    MixerModel::new(
        PolynomialBlock::new(vec![3.0, -15.0]),
        PolynomialBlock::new(vec![1.1, -0.8]),
        PolynomialBlock::new(vec![0.01, 0.0]),
        PolynomialBlock::new(vec![0.02, 0.3]),
    )
}

fn self_consistency_refs() -> ReferenceDataset {
    let grid: Vec<f64> = (0..25).map(|i| -30.0 + 1.25 * i as f64).collect();
    characterize(&self_consistency_truth(), &multi_lo(), &grid, -10.0).unwrap()
}

fn surrogate_refs() -> &'static ReferenceDataset {
    static REFS: OnceLock<ReferenceDataset> = OnceLock::new();
    REFS.get_or_init(|| {
        let grid: Vec<f64> = (0..=30).map(|i| -30.0 + i as f64).collect();
        characterize(&SurrogateDevice::default(), &multi_lo(), &grid, -10.0).unwrap()
    })
}

fn surrogate_fit() -> &'static (MixerModel, FitReport, Duration) {
    static FIT: OnceLock<(MixerModel, FitReport, Duration)> = OnceLock::new();
    FIT.get_or_init(|| {
        let t = Instant::now();
        let (m, r) = run_algorithm1(surrogate_refs(), &FitConfig::surrogate()).unwrap();
        (m, r, t.elapsed())
    })
}

/// Level errors of `model` at the reference power: RMS over the strong
/// bins and the largest overshoot over the weak bins.
fn spectral_errors(model: &MixerModel, refs: &ReferenceDataset, bins: &BinSets) -> (f64, f64) {
    let s = &refs.tone_config;
    let sp = model
        .mix_spectrum(
            &s.if_signal(refs.p_in_ref).unwrap(),
            &s.lo_signal().unwrap(),
            s.ref_impedance,
        )
        .unwrap();
    let (p, r) = (sp.power_dbm(), refs.s_r.power_dbm());
    let strong: Vec<f64> = bins.b_strong.iter().map(|&k| p[k] - r[k]).collect();
    let bs_rms = (strong.iter().map(|d| d * d).sum::<f64>() / strong.len() as f64).sqrt();
    let over = bins
        .b_weak
        .iter()
        .map(|&k| p[k] - r[k])
        .fold(f64::NEG_INFINITY, f64::max);
    (bs_rms, over)
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn c01_trig_expansion_oracle() {
    let t = Instant::now();
    let (fs, n) = (64e9, 12800);
    let step = fs / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut cases = 0usize;
    for k_core_if in 1..=2usize {
        for k_core_lo in 1..=2usize {
            for k_side_if in 0..=2usize {
                for k_side_lo in 0..=2usize {
                    for (n_if, n_lo) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                        cases += 1;
                        let mut coeffs = |k: usize| -> PolynomialBlock {
                            PolynomialBlock::new(
                                (0..k).map(|_| rng.random_range(-2.0..2.0)).collect(),
                            )
                        };
                        let model = MixerModel::new(
                            coeffs(k_core_if),
                            coeffs(k_core_lo),
                            coeffs(k_side_if),
                            coeffs(k_side_lo),
                        );
                        let mut tones = |port: Port, count: usize, lo: usize, hi: usize| {
                            let mut bins: Vec<usize> = Vec::new();
                            while bins.len() < count {
                                let b = rng.random_range(lo..hi);
                                if !bins.contains(&b) {
                                    bins.push(b);
                                }
                            }
                            bins.sort();
                            let list = bins
                                .iter()
                                .map(|&b| {
                                    Tone::new(
                                        b as f64 * step,
                                        rng.random_range(0.05..0.6),
                                        rng.random_range(0.0..6.0),
                                    )
                                    .unwrap()
                                })
                                .collect();
                            ToneSet::new(port, list).unwrap()
                        };
                        let if_tones = tones(Port::If, n_if, 150, 250);
                        let lo_tones = tones(Port::Lo, n_lo, 1750, 1950);
                        let v_if = synth_multitone(&if_tones, fs, n).unwrap();
                        let v_lo = synth_multitone(&lo_tones, fs, n).unwrap();
                        let got =
                            compute_spectrum(&eval_mixer(&model, &v_if, &v_lo).unwrap(), 50.0);
                        let series = mixer_series(
                            &model,
                            &tone_series(&if_tones, step),
                            &tone_series(&lo_tones, step),
                        );
                        let want =
                            Spectrum::from_bins(step, n, one_sided(&series, n), 50.0, -200.0)
                                .unwrap();
                        let top = want.power_dbm().iter().cloned().fold(f64::MIN, f64::max);
                        for k in 0..want.len() {
                            // bins the expansion populates, down to 120 dB below the strongest product
                            if series.contains_key(&(k as i64)) && want.power_dbm()[k] > top - 120.0
                            {
                                worst = worst.max((got.power_dbm()[k] - want.power_dbm()[k]).abs());
                                checked += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let pass = worst <= 1e-6 && elapsed.as_secs_f64() < 5.0;
    report(
        1,
        "trig expansion oracle",
        pass,
        format!("{cases} cases, {checked} product bins, worst {worst:.2e} dB"),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn c02_bin_partition_and_weak_penalty() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (n, step) = (256usize, 1e6);
    let mut failures = 0usize;
    let cases = 2000;
    for _ in 0..cases {
        let bins: Vec<Complex64> = (0..=n / 2)
            .map(|_| {
                if rng.random_bool(0.2) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(
                        dbm_to_amplitude(rng.random_range(-150.0..10.0), 50.0),
                        rng.random_range(0.0..6.0),
                    )
                }
            })
            .collect();
        let s_r = Spectrum::from_bins(step, n, bins, 50.0, -200.0).unwrap();
        let tau_w = rng.random_range(-140.0..-20.0);
        let tau_s = tau_w + rng.random_range(0.0..60.0);
        let core: Vec<f64> = (0..rng.random_range(1..40))
            .map(|_| rng.random_range(1..=n / 2) as f64 * step)
            .collect();
        let side: Vec<f64> = (0..rng.random_range(0..20))
            .map(|_| rng.random_range(1..=n / 2) as f64 * step)
            .collect();
        let b = select_bins(&s_r, &core, &side, tau_s, tau_w, None).unwrap();

        let p = s_r.power_dbm();
        let mut core_set: Vec<usize> = core.iter().map(|f| (f / step).round() as usize).collect();
        core_set.sort();
        core_set.dedup();
        let want_strong: Vec<usize> = core_set
            .iter()
            .copied()
            .filter(|&k| classify(p[k], tau_s, tau_w) == Level::Strong)
            .collect();
        let want_weak: Vec<usize> = core_set
            .iter()
            .copied()
            .filter(|&k| classify(p[k], tau_s, tau_w) == Level::Weak)
            .collect();
        let exclusive = b.b_strong.iter().all(|k| !b.b_weak.contains(k));
        let exhaustive = b.b_strong == want_strong && b.b_weak == want_weak && b.b_core == core_set;
        let side_ok = b.b_side.iter().all(|k| !core_set.contains(k));

        // predictions that match on strong bins and sit at or below on weak bins cost nothing
        let mut pred: Vec<Complex64> = s_r.bins().to_vec();
        for &k in &b.b_weak {
            pred[k] *= rng.random_range(0.0..1.0);
        }
        let s_p = s_r.with_bins(pred.clone()).unwrap();
        let zero = spectral_loss(&s_p, &s_r, &b, 1.0, 1.0).unwrap() == 0.0;
        // raising a weak bin or moving a strong bin must cost something
        let mut positive = true;
        if let Some(&k) = b.b_weak.first() {
            let mut up = pred.clone();
            up[k] = s_r.bins()[k] * 1.5;
            positive &=
                spectral_loss(&s_r.with_bins(up).unwrap(), &s_r, &b, 1.0, 1.0).unwrap() > 0.0;
        }
        if let Some(&k) = b.b_strong.first() {
            let mut off = pred.clone();
            off[k] *= 0.9;
            positive &=
                spectral_loss(&s_r.with_bins(off).unwrap(), &s_r, &b, 1.0, 1.0).unwrap() > 0.0;
        }
        if !(exclusive && exhaustive && side_ok && zero && positive) {
            failures += 1;
        }
    }
    let elapsed = t.elapsed();
    let pass = failures == 0 && elapsed.as_secs_f64() < 10.0;
    report(
        2,
        "bin partition and one-sided weak penalty",
        pass,
        format!("{cases} cases, {failures} failures"),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn c03_self_consistency_fit() {
    let refs = self_consistency_refs();
    let t = Instant::now();
    let (model, rep) = run_algorithm1(&refs, &FitConfig::table1()).unwrap();
    let elapsed = t.elapsed();
    let curves = sweep_mixer(&model, &refs.tone_config, &refs.power_grid).unwrap();
    let rms_f = rms(&curves.f_f, &refs.y_f);
    let rms_im3 = rms(&curves.f_im3, &refs.y_im3);
    let (bs_rms, _) = spectral_errors(&model, &refs, &rep.bins);
    let pass = rms_f <= 0.5 && rms_im3 <= 0.5 && bs_rms <= 1.0 && elapsed.as_secs_f64() < 300.0;
    report(
        3,
        "self-consistency fit",
        pass,
        format!(
            "f_F RMS {rms_f:.4} dB, f_IM3 RMS {rms_im3:.4} dB, B_s RMS {bs_rms:.4} dB over {} bins",
            rep.bins.b_strong.len()
        ),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn c04_surrogate_fit() {
    let refs = surrogate_refs();
    let (model, rep, elapsed) = surrogate_fit();
    let (bs_rms, over) = spectral_errors(model, refs, &rep.bins);
    let curves = sweep_mixer(model, &refs.tone_config, &refs.power_grid).unwrap();
    let p_model = p1db(&refs.power_grid, &curves.f_f);
    let p_ref = p1db(&refs.power_grid, &refs.y_f);
    let dp = match (p_model, p_ref) {
        (Some(a), Some(b)) => (a - b).abs(),
        _ => f64::INFINITY,
    };
    let pass = bs_rms <= 1.0 && over <= 3.0 && dp <= 1.0 && elapsed.as_secs_f64() < 600.0;
    report(
        4,
        "surrogate fit",
        pass,
        format!(
            "B_s RMS {bs_rms:.3} dB ({} bins), worst B_w overshoot {over:.2} dB ({} bins), P1dB model {:.2} vs surrogate {:.2} dBm",
            rep.bins.b_strong.len(),
            rep.bins.b_weak.len(),
            p_model.unwrap_or(f64::NAN),
            p_ref.unwrap_or(f64::NAN)
        ),
        *elapsed,
    );
    assert!(pass);
}

/// Small-signal conversion gain to the fundamental, dB.
fn small_signal_gain<M: Mixer>(mixer: &M, setup: &ToneSweep) -> f64 {
    let p = -30.0;
    sweep_mixer(mixer, setup, &[p]).unwrap().f_f[0] - p
}

#[test]
fn c05_multi_lo_gain_reduction() {
    let t = Instant::now();
    let dev = SurrogateDevice::default();
    let gap_dev = small_signal_gain(&dev, &multi_lo()) - small_signal_gain(&dev, &single_lo());
    let (model, _, _) = surrogate_fit();
    let gap_model = small_signal_gain(model, &multi_lo()) - small_signal_gain(model, &single_lo());
    let pass = gap_dev < 0.0 && gap_model < 0.0;
    report(
        5,
        "multi-LO conversion gain reduction",
        pass,
        format!("two-tone minus single-tone LO gain: surrogate {gap_dev:.3} dB, fitted model {gap_model:.3} dB"),
        t.elapsed(),
    );
    assert!(pass);
}

#[test]
fn c06_radar_processing_oracle() {
    let t = Instant::now();
    let base = RadarScenario::table2(MixerChoice::Ideal);
    let cfg = base.frame_config.clone();
    let m = cfg.symbols;
    let pad = base.zero_pad;

    // off-bin: half a Doppler bin between cells of the unpadded map
    let mut off = base.clone();
    off.targets = vec![Target::at_bins(&cfg, 10.0, 1.5, 1.0)];
    let run = run_scenario(&off).unwrap();
    let (r0, d0) = run.metrics.peak_positions[0];
    let oracle = dirichlet_cut(m, pad, 0.0);
    let (oracle_pslr, oracle_islr) = cut_sidelobes(&oracle, 0);
    let pslr = run.metrics.pslr;

    // the processing alone, fed with an ideal echo grid, reproduces the kernel
    let echo = ndarray::Array2::from_shape_fn((cfg.subcarriers, m), |(n, s)| {
        Complex64::from_polar(
            1.0,
            -std::f64::consts::TAU * 10.0 * n as f64 / cfg.subcarriers as f64,
        ) * Complex64::from_polar(1.0, std::f64::consts::TAU * 1.5 * s as f64 / m as f64)
    });
    let ones = ndarray::Array2::from_elem((cfg.subcarriers, m), Complex64::new(1.0, 0.0));
    let ideal = range_doppler(&ones, &echo, pad, &cfg).unwrap();
    let cut: Vec<f64> = ideal
        .doppler_cut(10 * pad)
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .collect();
    let (ideal_pslr, _) = cut_sidelobes(&cut, m * pad / 2 + 12);

    // on-bin: two targets on integer range and Doppler bins
    let mut on = base.clone();
    on.targets = vec![
        Target::at_bins(&cfg, 12.0, 3.0, 1.0),
        Target::at_bins(&cfg, 30.0, -5.0, 0.5),
    ];
    let on_run = run_scenario(&on).unwrap();
    let want_on = vec![
        (12 * pad, m * pad / 2 + 3 * pad),
        (30 * pad, m * pad / 2 - 5 * pad),
    ];
    let elapsed = t.elapsed();

    let pass = (pslr - (-13.26)).abs() <= 0.2
        && (pslr - oracle_pslr).abs() <= 0.1
        && (ideal_pslr - oracle_pslr).abs() <= 1e-9
        && (r0, d0) == (10 * pad, m * pad / 2 + 12)
        && on_run.metrics.peak_positions == want_on
        && elapsed.as_secs_f64() < 60.0;
    report(
        6,
        "radar processing oracle",
        pass,
        format!(
            "off-bin PSLR {pslr:.3} dB (kernel {oracle_pslr:.3} dB, processing alone {ideal_pslr:.3} dB), kernel ISLR {oracle_islr:.2} dB, on-bin peaks {:?}",
            on_run.metrics.peak_positions
        ),
        elapsed,
    );
    assert!(pass);
}

fn two_target_run(tx: MixerChoice, p_tx: f64) -> RadarRun {
    let mut s = RadarScenario::table2(tx);
    s.frame_config.avg_if_power_dbm = p_tx;
    run_scenario(&s).unwrap()
}

#[test]
fn c07_model_vs_surrogate_radar_images() {
    let t = Instant::now();
    let (model, _, _) = surrogate_fit();
    let a = two_target_run(MixerChoice::Surrogate(SurrogateDevice::default()), -13.0).metrics;
    let b = two_target_run(MixerChoice::Model(model.clone()), -13.0).metrics;
    let (ds, dp, di) = (
        (a.sinr - b.sinr).abs(),
        (a.pslr - b.pslr).abs(),
        (a.islr - b.islr).abs(),
    );
    let elapsed = t.elapsed();
    let pass = ds <= 1.5 && dp <= 0.2 && di <= 0.3 && elapsed.as_secs_f64() < 600.0;
    report(
        7,
        "model vs surrogate radar images",
        pass,
        format!(
            "SINR {:.2}/{:.2} dB, PSLR {:.3}/{:.3} dB, ISLR {:.3}/{:.3} dB (surrogate/model); deltas {ds:.3}/{dp:.4}/{di:.4} dB",
            a.sinr, b.sinr, a.pslr, b.pslr, a.islr, b.islr
        ),
        elapsed,
    );
    assert!(pass);
}

#[test]
fn c08_backoff_monotonicity() {
    let t = Instant::now();
    let sinr: Vec<f64> = [-20.0, -10.0, 0.0]
        .iter()
        .map(|&p| {
            two_target_run(MixerChoice::Surrogate(SurrogateDevice::default()), p)
                .metrics
                .sinr
        })
        .collect();
    let elapsed = t.elapsed();
    let pass = sinr.windows(2).all(|w| w[1] <= w[0]) && elapsed.as_secs_f64() < 900.0;
    report(
        8,
        "SINR falls with transmit power",
        pass,
        format!(
            "SINR at -20/-10/0 dBm: {:.2}/{:.2}/{:.2} dB",
            sinr[0], sinr[1], sinr[2]
        ),
        elapsed,
    );
    assert!(pass);
}

fn radar_bytes(run: &RadarRun) -> (String, Vec<u64>) {
    (
        serde_json::to_string(&run.metrics).unwrap(),
        run.rdm.power.iter().map(|v| v.to_bits()).collect(),
    )
}

#[test]
fn c09_determinism_across_thread_counts() {
    let t = Instant::now();
    let fit = |refs: &ReferenceDataset, cfg: &FitConfig| {
        let (m, r) = run_algorithm1(refs, cfg).unwrap();
        (save_model(&m), r.to_json())
    };
    let sc = self_consistency_refs();
    let sr = surrogate_refs();
    let one = in_pool(1, || {
        (
            fit(&sc, &FitConfig::table1()),
            fit(sr, &FitConfig::surrogate()),
        )
    });
    let many = in_pool(4, || {
        (
            fit(&sc, &FitConfig::table1()),
            fit(sr, &FitConfig::surrogate()),
        )
    });
    let again = in_pool(4, || {
        (
            fit(&sc, &FitConfig::table1()),
            fit(sr, &FitConfig::surrogate()),
        )
    });
    let fits_equal = one == many && many == again;

    let model = load_model_from(&one.1 .0);
    let radar = |threads| {
        in_pool(threads, || {
            radar_bytes(&two_target_run(MixerChoice::Model(model.clone()), -13.0))
        })
    };
    let radar_equal = radar(1) == radar(4);
    let elapsed = t.elapsed();
    let pass = fits_equal && radar_equal;
    report(
        9,
        "byte-identical reruns across thread counts",
        pass,
        format!("fit documents identical: {fits_equal}, radar outputs identical: {radar_equal}"),
        elapsed,
    );
    assert!(pass);
}

fn load_model_from(doc: &str) -> MixerModel {
    multibox::model::load_model(doc).unwrap()
}

#[test]
fn c10_frame_papr() {
    let t = Instant::now();
    let seeds = 100;
    let mut total = 0.0;
    for seed in 0..seeds {
        let frame = generate_ofdm_frame(&OfdmFrameConfig::table2(seed)).unwrap();
        // 8x oversampled IF record so the envelope peaks between baseband samples are seen
        let x = upconvert_to_if(&frame, 4e9).unwrap();
        total += papr_real_db(x.samples(), PaprConvention::Envelope).unwrap();
    }
    let mean = total / seeds as f64;
    let elapsed = t.elapsed();
    let pass = (10.0..=13.5).contains(&mean) && elapsed.as_secs_f64() < 30.0;
    report(
        10,
        "frame PAPR",
        pass,
        format!("mean over {seeds} seeds {mean:.2} dB"),
        elapsed,
    );
    assert!(pass);
}
