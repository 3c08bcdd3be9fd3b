use std::path::Path;

use multibox::model::{fit_line, p1db};
use multibox::oracle::{characterize, save_reference_csv, ReferenceDataset};
use multibox::signals::Spectrum;
use serde::Serialize;

use crate::config::{base_dir, parse_range, CharacterizeConfig};
use crate::failure::{read_text, write_text, Failure, Outcome};
use crate::manifest::{CommandKind, RunManifest};
use crate::output::{csv, write_json};
use crate::svg::{line_plot, LinePlot, Series};

#[derive(Serialize)]
struct Summary {
    rows: usize,
    p_in_ref_dbm: f64,
    fund_freq_hz: f64,
    im3_freq_hz: f64,
    p1db_in_dbm: Option<f64>,
    /// Least-squares line through the lowest quarter of the fundamental.
    linear_slope: f64,
    linear_intercept_dbm: f64,
    im3_slope_small_signal: f64,
}

/// Points over the lowest quarter of the grid, at least two.
pub fn low_quarter(n: usize) -> usize {
    (n / 4).max(2).min(n)
}

pub fn run(config_path: &Path, out: &Path, grid_override: Option<&str>) -> Outcome<()> {
    let cfg = CharacterizeConfig::from_toml(&read_text(config_path)?)
        .map_err(|e| e.context(config_path.display()))?;
    let grid = match grid_override {
        Some(s) => parse_range(s)?,
        None => cfg.power_grid.points()?,
    };
    let base = base_dir(config_path);
    let device = cfg
        .device
        .resolve(base)
        .map_err(|e| Failure::from(e).context("device"))?;
    cfg.sweep.bins()?;
    if !grid.iter().any(|p| (p - cfg.p_in_ref_dbm).abs() <= 1e-9) {
        return Err(Failure::invalid(format!(
            "p_in_ref_dbm {} is not on the power grid",
            cfg.p_in_ref_dbm
        )));
    }

    let mut manifest = RunManifest::new(CommandKind::Characterize, config_path, None, out);
    manifest.add_input(config_path)?;
    if let Some(p) = cfg.device.referenced_file(base) {
        manifest.add_input(&p)?;
    }
    manifest.write(out)?;

    let refs = characterize(&device, &cfg.sweep, &grid, cfg.p_in_ref_dbm)?;
    write_outputs(&refs, out)
}

fn write_outputs(refs: &ReferenceDataset, out: &Path) -> Outcome<()> {
    let mut buf = Vec::new();
    save_reference_csv(refs, &mut buf)?;
    write_text(
        &out.join("reference.csv"),
        &String::from_utf8(buf).expect("reference CSV is ASCII"),
    )?;

    let g = &refs.power_grid;
    let m = low_quarter(g.len());
    let (slope, icpt) = fit_line(&g[..m], &refs.y_f[..m]);
    let (im3_slope, _) = fit_line(&g[..m], &refs.y_im3[..m]);
    let p1 = p1db(g, &refs.y_f);
    let linear: Vec<f64> = g.iter().map(|p| slope * p + icpt).collect();

    let rows = (0..g.len()).map(|i| vec![g[i], refs.y_f[i], refs.y_im3[i], linear[i]]);
    write_text(
        &out.join("am_am.csv"),
        &csv(&["p_in_dbm", "fund_dbm", "im3_dbm", "linear_ref_dbm"], rows),
    )?;
    let pts = |y: &[f64]| g.iter().copied().zip(y.iter().copied()).collect::<Vec<_>>();
    let plot = LinePlot {
        title: "AM-AM: fundamental and IM3".into(),
        x_label: "input power (dBm)".into(),
        y_label: "output power (dBm)".into(),
        series: vec![
            Series::line("fundamental", pts(&refs.y_f)),
            Series::line("IM3", pts(&refs.y_im3)),
            Series::line("linear reference", pts(&linear)).dashed(),
        ],
        annotations: p1
            .map(|p| (p, format!("P1dB {p:.2} dBm")))
            .into_iter()
            .collect(),
        y_floor: None,
    };
    write_text(&out.join("am_am.svg"), &line_plot(&plot))?;

    write_spectrum(
        &refs.s_r,
        out,
        "spectrum",
        &format!("Output spectrum at {} dBm", refs.p_in_ref),
    )?;

    let t = &refs.tone_config;
    write_json(
        &out.join("summary.json"),
        &Summary {
            rows: g.len(),
            p_in_ref_dbm: refs.p_in_ref,
            fund_freq_hz: t.fund_freq,
            im3_freq_hz: t.im3_freq,
            p1db_in_dbm: p1,
            linear_slope: slope,
            linear_intercept_dbm: icpt,
            im3_slope_small_signal: im3_slope,
        },
    )
}

/// Bins above the floor as CSV and a marker plot.
fn write_spectrum(s: &Spectrum, out: &Path, stem: &str, title: &str) -> Outcome<()> {
    let p = s.power_dbm();
    let rows = (0..s.len()).map(|k| vec![s.frequency(k), p[k]]);
    write_text(
        &out.join(format!("{stem}.csv")),
        &csv(&["freq_hz", "power_dbm"], rows),
    )?;
    let pts: Vec<(f64, f64)> = (0..s.len())
        .filter(|&k| p[k] > s.floor_dbm())
        .map(|k| (s.frequency(k) / 1e9, p[k]))
        .collect();
    let plot = LinePlot {
        title: title.into(),
        x_label: "frequency (GHz)".into(),
        y_label: "power (dBm)".into(),
        series: vec![Series::line("bins above floor", pts).markers()],
        annotations: vec![],
        y_floor: Some(-160.0),
    };
    write_text(&out.join(format!("{stem}.svg")), &line_plot(&plot))
}
