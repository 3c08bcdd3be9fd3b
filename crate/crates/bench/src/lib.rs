//! Shared fixtures for the criterion benches.

use multibox::fit::{reference_bins, BinSets, FitConfig, FitContext};
use multibox::model::{MixerModel, PolynomialBlock, ToneSweep, TABLE1_MULTI_LO_HZ};
use multibox::oracle::{characterize, ReferenceDataset, SurrogateDevice};
use multibox::radar::{run_scenario, MixerChoice, RadarRun, RadarScenario};

/// Cubic-core model with both sidebranches, close to a surrogate fit.
pub fn sample_model() -> MixerModel {
    MixerModel::new(
        PolynomialBlock::new(vec![3.0, -15.0]),
        PolynomialBlock::new(vec![1.1, -0.8]),
        PolynomialBlock::new(vec![0.01, 0.0]),
        PolynomialBlock::new(vec![0.02, 0.3]),
    )
}

pub fn table1_sweep() -> ToneSweep {
    ToneSweep::table1(&TABLE1_MULTI_LO_HZ).expect("fixed setup is valid")
}

/// -30..0 dBm in 1 dB steps.
pub fn power_grid() -> Vec<f64> {
    (0..=30).map(|i| -30.0 + i as f64).collect()
}

/// Surrogate reference on the multi-LO setup with the fit state it needs.
pub struct FitFixture {
    pub refs: ReferenceDataset,
    pub cfg: FitConfig,
    pub bins: BinSets,
    pub ctx: FitContext,
}

pub fn fit_fixture() -> FitFixture {
    let refs = characterize(
        &SurrogateDevice::default(),
        &table1_sweep(),
        &power_grid(),
        -10.0,
    )
    .expect("surrogate sweep");
    let cfg = FitConfig::surrogate();
    let bins = reference_bins(&refs, &cfg).expect("bins");
    let ctx = FitContext::new(&refs, &bins, cfg.k_core, cfg.k_side_if(), cfg.k_side_lo())
        .expect("context");
    FitFixture {
        refs,
        cfg,
        bins,
        ctx,
    }
}

/// One full radar run through the ideal comb, for its TX/RX grids.
pub fn radar_run() -> (RadarScenario, RadarRun) {
    let s = RadarScenario::table2(MixerChoice::Ideal);
    let run = run_scenario(&s).expect("table II scenario");
    (s, run)
}
