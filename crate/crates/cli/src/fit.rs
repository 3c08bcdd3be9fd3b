use std::path::Path;

use multibox::fit::{run_algorithm1, BinSets, FitConfig};
use multibox::model::{save_model, sweep_am_am, Mixer, MixerModel};
use multibox::oracle::{load_reference_csv, ReferenceDataset};
use multibox::signals::Spectrum;
use serde::Serialize;

use crate::failure::{read_text, write_text, Failure, Outcome};
use crate::manifest::{CommandKind, RunManifest};
use crate::output::{csv, write_json};
use crate::svg::{line_plot, LinePlot, Series};

/// Model against reference residuals in dB.
#[derive(Debug, Serialize)]
pub struct Residuals {
    pub b_s_rms_db: f64,
    pub b_s_max_abs_db: f64,
    /// Largest amount the model exceeds the reference on the weak bins.
    pub b_w_max_overshoot_db: f64,
    pub fund_rms_db: f64,
    pub im3_rms_db: f64,
    pub n_strong: usize,
    pub n_weak: usize,
    pub n_side: usize,
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x * x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

pub fn run(
    config_path: &Path,
    reference: &Path,
    out: &Path,
    seed: Option<u64>,
    starts: Option<usize>,
) -> Outcome<()> {
    let mut cfg = FitConfig::from_toml(&read_text(config_path)?)
        .map_err(|e| Failure::from(e).context(config_path.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(n) = starts {
        cfg.n_starts = n;
    }
    cfg.validate()?;
    let refs = load_reference_csv(read_text(reference)?.as_bytes())
        .map_err(|e| Failure::from(e).context(reference.display()))?;

    let mut manifest = RunManifest::new(CommandKind::Fit, config_path, Some(cfg.seed), out);
    manifest.add_input(config_path)?;
    manifest.add_input(reference)?;
    manifest.write(out)?;

    let (model, report) = run_algorithm1(&refs, &cfg)?;
    write_text(&out.join("model.json"), &save_model(&model))?;
    write_text(&out.join("fit_report.json"), &report.to_json())?;
    write_text(&out.join("fit_trace.csv"), &report.trace_csv())?;
    write_overlays(&model, &refs, &report.bins, out)
}

fn write_overlays(
    model: &MixerModel,
    refs: &ReferenceDataset,
    bins: &BinSets,
    out: &Path,
) -> Outcome<()> {
    let t = &refs.tone_config;
    let g = &refs.power_grid;
    let curves = sweep_am_am(model, t, g)?;
    let rows = (0..g.len()).map(|i| {
        vec![
            g[i],
            refs.y_f[i],
            curves.f_f[i],
            refs.y_im3[i],
            curves.f_im3[i],
        ]
    });
    write_text(
        &out.join("overlay_am_am.csv"),
        &csv(
            &[
                "p_in_dbm",
                "ref_fund_dbm",
                "model_fund_dbm",
                "ref_im3_dbm",
                "model_im3_dbm",
            ],
            rows,
        ),
    )?;
    let pts = |y: &[f64]| g.iter().copied().zip(y.iter().copied()).collect::<Vec<_>>();
    let plot = LinePlot {
        title: "AM-AM: reference and model".into(),
        x_label: "input power (dBm)".into(),
        y_label: "output power (dBm)".into(),
        series: vec![
            Series::line("reference fundamental", pts(&refs.y_f)),
            Series::line("reference IM3", pts(&refs.y_im3)),
            Series::line("model fundamental", pts(&curves.f_f)).dashed(),
            Series::line("model IM3", pts(&curves.f_im3)).dashed(),
        ],
        annotations: vec![],
        y_floor: None,
    };
    write_text(&out.join("overlay_am_am.svg"), &line_plot(&plot))?;

    let s_p = model.mix_spectrum(
        &t.if_signal(refs.p_in_ref)?,
        &t.lo_signal()?,
        t.ref_impedance,
    )?;
    let res = write_spectrum_overlay(&s_p, &refs.s_r, bins, out)?;
    write_json(
        &out.join("residuals.json"),
        &Residuals {
            fund_rms_db: rms(refs.y_f.iter().zip(&curves.f_f).map(|(a, b)| a - b)),
            im3_rms_db: rms(refs.y_im3.iter().zip(&curves.f_im3).map(|(a, b)| a - b)),
            ..res
        },
    )
}

fn write_spectrum_overlay(
    s_p: &Spectrum,
    s_r: &Spectrum,
    bins: &BinSets,
    out: &Path,
) -> Outcome<Residuals> {
    let (p, r) = (s_p.power_dbm(), s_r.power_dbm());
    let label = |k: usize| {
        if bins.b_strong.contains(&k) {
            "strong"
        } else if bins.b_weak.contains(&k) {
            "weak"
        } else if bins.b_core.contains(&k) {
            "core"
        } else {
            "side"
        }
    };
    let mut all: Vec<usize> = bins.b_core.iter().chain(&bins.b_side).copied().collect();
    all.sort_unstable();
    all.dedup();

    let mut table = String::from("bin,freq_hz,set,ref_dbm,model_dbm,residual_db\n");
    for &k in &all {
        table.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            multibox::fmt17(s_r.frequency(k)),
            label(k),
            multibox::fmt17(r[k]),
            multibox::fmt17(p[k]),
            multibox::fmt17(p[k] - r[k])
        ));
    }
    write_text(&out.join("overlay_spectrum.csv"), &table)?;

    let pts = |v: &[f64]| {
        all.iter()
            .map(|&k| (s_r.frequency(k) / 1e9, v[k]))
            .collect::<Vec<_>>()
    };
    let plot = LinePlot {
        title: "Spectrum at the reference power".into(),
        x_label: "frequency (GHz)".into(),
        y_label: "power (dBm)".into(),
        series: vec![
            Series::line("reference", pts(r)).markers(),
            Series::line("model", pts(p)).markers(),
        ],
        annotations: vec![],
        y_floor: Some(-160.0),
    };
    write_text(&out.join("overlay_spectrum.svg"), &line_plot(&plot))?;

    let strong = bins.b_strong.iter().map(|&k| p[k] - r[k]);
    Ok(Residuals {
        b_s_rms_db: rms(strong.clone()),
        b_s_max_abs_db: strong.map(f64::abs).fold(0.0, f64::max),
        b_w_max_overshoot_db: bins
            .b_weak
            .iter()
            .map(|&k| (p[k] - r[k]).max(0.0))
            .fold(0.0, f64::max),
        fund_rms_db: 0.0,
        im3_rms_db: 0.0,
        n_strong: bins.b_strong.len(),
        n_weak: bins.b_weak.len(),
        n_side: bins.b_side.len(),
    })
}
