//! Minimal static SVG charts: line plots and a pooled heatmap.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Draw markers instead of a polyline.
    pub markers: bool,
}

impl Series {
    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.to_string(),
            points,
            dashed: false,
            markers: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn markers(mut self) -> Self {
        self.markers = true;
        self
    }
}

pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical marker lines with a caption.
    pub annotations: Vec<(f64, String)>,
    pub y_floor: Option<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Round tick step giving roughly `n` intervals over `span`.
fn tick_step(span: f64, n: f64) -> f64 {
    let raw = span / n;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn range_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        esc(title)
    );
}

pub fn line_plot(plot: &LinePlot) -> String {
    let all = || plot.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = range_of(all().map(|p| p.0));
    let (mut y0, y1) = range_of(all().map(|p| p.1));
    if let Some(f) = plot.y_floor {
        y0 = y0.max(f);
    }
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y.max(y0) - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    header(&mut out, &plot.title);
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for (axis, lo, hi) in [('x', x0, x1), ('y', y0, y1)] {
        let step = tick_step(hi - lo, 8.0);
        let mut t = (lo / step).ceil() * step;
        while t <= hi + 1e-9 * step {
            let label = format!("{}", (t / step).round() * step);
            if axis == 'x' {
                let x = sx(t);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
                    TOP + ph,
                    TOP + ph + 16.0
                );
            } else {
                let y = sy(t);
                let _ = writeln!(
                    out,
                    r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
                    LEFT + pw,
                    LEFT - 6.0,
                    y + 4.0
                );
            }
            t += step;
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 14.0,
        esc(&plot.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(&plot.y_label)
    );

    for (i, s) in plot.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.markers {
            for &(x, y) in &s.points {
                if y.is_finite() && (plot.y_floor.is_none() || y > y0) {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        sx(x),
                        sy(y)
                    );
                }
            }
        } else {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="14" height="3" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 10.0,
            ly - 4.0,
            LEFT + 30.0,
            ly,
            esc(&s.label)
        );
    }
    for (x, caption) in &plot.annotations {
        if x.is_finite() {
            let px = sx(*x);
            let _ = writeln!(
                out,
                r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="3 3"/><text x="{:.2}" y="{:.2}">{}</text>"##,
                TOP + ph,
                px + 4.0,
                TOP + ph - 8.0,
                esc(caption)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Color for `t` in `[0, 1]` on a dark-blue to yellow ramp.
fn ramp(t: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [13.0, 8.0, 135.0]),
        (0.25, [126.0, 3.0, 168.0]),
        (0.5, [204.0, 71.0, 120.0]),
        (0.75, [248.0, 149.0, 64.0]),
        (1.0, [240.0, 249.0, 33.0]),
    ];
    let t = t.clamp(0.0, 1.0);
    let i = STOPS
        .iter()
        .rposition(|s| s.0 <= t)
        .unwrap_or(0)
        .min(STOPS.len() - 2);
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let f = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3)
        .map(|k| (a.1[k] + f * (b.1[k] - a.1[k])).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

pub struct Heatmap<'a> {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Row-major values, `rows x cols`; rows run along y.
    pub values: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Color scale limits in the value unit.
    pub scale: (f64, f64),
    /// Upper bound on drawn cells per axis; larger maps are max-pooled.
    pub max_cells: usize,
}

pub fn heatmap(h: &Heatmap) -> String {
    let pool = |n: usize| n.div_ceil(h.max_cells.max(1)).max(1);
    let (pr, pc) = (pool(h.rows), pool(h.cols));
    let (nr, nc) = (h.rows.div_ceil(pr), h.cols.div_ceil(pc));
    let pw = W - LEFT - RIGHT - 60.0;
    let ph = H - TOP - BOTTOM;
    let (cw, ch) = (pw / nc as f64, ph / nr as f64);

    let mut out = String::new();
    header(&mut out, &h.title);
    for r in 0..nr {
        for c in 0..nc {
            let mut v = f64::NEG_INFINITY;
            for rr in r * pr..((r + 1) * pr).min(h.rows) {
                for cc in c * pc..((c + 1) * pc).min(h.cols) {
                    v = v.max(h.values[rr * h.cols + cc]);
                }
            }
            let t = (v - h.scale.0) / (h.scale.1 - h.scale.0);
            // row 0 at the bottom
            let y = TOP + ph - (r + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                LEFT + c as f64 * cw,
                cw + 0.05,
                ch + 0.05,
                ramp(t)
            );
        }
    }
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for (axis, (lo, hi)) in [('x', h.x_range), ('y', h.y_range)] {
        let step = tick_step(hi - lo, 6.0);
        let mut t = (lo / step).ceil() * step;
        while t <= hi + 1e-9 * step.abs() {
            let label = format!("{}", (t / step).round() * step);
            let f = (t - lo) / (hi - lo);
            if axis == 'x' {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
                    LEFT + f * pw,
                    TOP + ph + 16.0
                );
            } else {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
                    LEFT - 6.0,
                    TOP + ph - f * ph + 4.0
                );
            }
            t += step;
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 14.0,
        esc(&h.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(&h.y_label)
    );
    let bx = LEFT + pw + 20.0;
    for i in 0..50 {
        let t = i as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{bx:.2}" y="{:.2}" width="14" height="{:.2}" fill="{}"/>"#,
            TOP + ph - (i + 1) as f64 * ph / 50.0,
            ph / 50.0 + 0.05,
            ramp(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{}</text><text x="{:.2}" y="{:.2}">{}</text>"#,
        bx,
        TOP - 6.0,
        h.scale.1,
        bx,
        TOP + ph + 16.0,
        h.scale.0
    );
    out.push_str("</svg>\n");
    out
}
