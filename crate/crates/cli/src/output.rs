use std::fmt::Write as _;
use std::path::Path;

use multibox::fmt17;
use multibox::radar::RangeDopplerMap;
use serde::Serialize;

use crate::failure::{write_text, Outcome};

/// CSV with full-precision floats.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt17).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome<()> {
    let mut s = serde_json::to_string_pretty(value).expect("outputs always serialize");
    s.push('\n');
    write_text(path, &s)
}

/// Range-Doppler map in dB: one row per range cell, one column per Doppler
/// cell, axes in the first row and column. Four decimals.
pub fn rdm_csv(rdm: &RangeDopplerMap) -> String {
    let mut out = String::from("range_m\\doppler_hz");
    for d in &rdm.doppler_axis {
        let _ = write!(out, ",{d:.4}");
    }
    out.push('\n');
    for (r, row) in rdm.range_axis.iter().zip(rdm.power.rows()) {
        let _ = write!(out, "{r:.4}");
        for v in row {
            let _ = write!(out, ",{v:.4}");
        }
        out.push('\n');
    }
    out
}

/// Heatmap of the map with range on x and Doppler on y.
pub fn rdm_svg(rdm: &RangeDopplerMap, title: &str) -> String {
    let (nr, nd) = rdm.dim();
    // heatmap rows run along y, so transpose
    let mut values = Vec::with_capacity(nr * nd);
    for d in 0..nd {
        for r in 0..nr {
            values.push(rdm.power[[r, d]]);
        }
    }
    let span = |a: &[f64]| (a[0], a[a.len() - 1]);
    crate::svg::heatmap(&crate::svg::Heatmap {
        title: title.to_string(),
        x_label: "range (m)".into(),
        y_label: "Doppler (kHz)".into(),
        values: &values,
        rows: nd,
        cols: nr,
        x_range: span(&rdm.range_axis),
        y_range: {
            let (a, b) = span(&rdm.doppler_axis);
            (a / 1e3, b / 1e3)
        },
        scale: (-80.0, 0.0),
        max_cells: 128,
    })
}
