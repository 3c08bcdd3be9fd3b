use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::dsp::unwrap_phase;
use crate::error::{Error, Result};
use crate::fmt17;
use crate::model::{check_grid, FundamentalMap, Mixer, Sideband, ToneSweep};
use crate::signals::{
    parse_bin_row, parse_number, write_spectrum_rows, Header, Port, Spectrum, Tone, ToneSet,
};

/// Reference curves and spectrum a model is fitted against.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDataset {
    pub power_grid: Vec<f64>,
    pub y_f: Vec<f64>,
    pub y_im3: Vec<f64>,
    pub p_in_ref: f64,
    pub s_r: Spectrum,
    /// Unwrapped fundamental phase per grid power, relative to the first
    /// grid point, keyed by output bin.
    pub phase_curves: BTreeMap<usize, Vec<f64>>,
    pub tone_config: ToneSweep,
}

impl ReferenceDataset {
    pub fn validate(&self) -> Result<()> {
        let n = self.power_grid.len();
        check_grid(&self.power_grid)?;
        if self.y_f.len() != n {
            return Err(Error::Alignment(format!(
                "y_f has {} points, power grid {n}",
                self.y_f.len()
            )));
        }
        if self.y_im3.len() != n {
            return Err(Error::Alignment(format!(
                "y_im3 has {} points, power grid {n}",
                self.y_im3.len()
            )));
        }
        for (k, c) in &self.phase_curves {
            if c.len() != n {
                return Err(Error::Alignment(format!(
                    "phase curve of bin {k} has {} points, power grid {n}",
                    c.len()
                )));
            }
            if *k >= self.s_r.len() {
                return Err(Error::Alignment(format!(
                    "phase bin {k} outside the reference spectrum"
                )));
            }
        }
        self.ref_index()?;
        let t = &self.tone_config;
        if self.s_r.record_len() != t.length
            || (self.s_r.sample_rate() - t.sample_rate).abs() > 1e-9 * t.sample_rate
        {
            return Err(Error::Alignment(
                "reference spectrum grid differs from the tone configuration".into(),
            ));
        }
        Ok(())
    }

    /// Grid index of `p_in_ref`.
    pub fn ref_index(&self) -> Result<usize> {
        self.power_grid
            .iter()
            .position(|&p| (p - self.p_in_ref).abs() <= 1e-9)
            .ok_or(Error::Alignment(format!(
                "p_in_ref {} dBm is not on the power grid",
                self.p_in_ref
            )))
    }

    pub fn fundamentals(&self) -> Result<FundamentalMap> {
        FundamentalMap::from_tones(
            &self.tone_config.if_template,
            &self.tone_config.lo_tones,
            Sideband::Upper,
            self.tone_config.bin_step(),
        )
    }
}

/// Sweep a device over `power_grid` and collect a reference dataset.
///
/// Phase curves are unwrapped along ascending power and expressed relative
/// to the smallest power.
pub fn characterize<M: Mixer + ?Sized>(
    device: &M,
    setup: &ToneSweep,
    power_grid: &[f64],
    p_in_ref: f64,
) -> Result<ReferenceDataset> {
    check_grid(power_grid)?;
    let (kf, k3) = setup.bins()?;
    let ref_at = power_grid
        .iter()
        .position(|&p| (p - p_in_ref).abs() <= 1e-9)
        .ok_or(Error::Alignment(format!(
            "p_in_ref {p_in_ref} dBm is not on the power grid"
        )))?;
    let fund = FundamentalMap::from_tones(
        &setup.if_template,
        &setup.lo_tones,
        Sideband::Upper,
        setup.bin_step(),
    )?;
    let lo = setup.lo_signal()?;
    let spectra: Vec<Spectrum> = power_grid
        .par_iter()
        .map(|&p| device.mix_spectrum(&setup.if_signal(p)?, &lo, setup.ref_impedance))
        .collect::<Result<_>>()?;
    let mut phase_curves = BTreeMap::new();
    for k in fund.bins() {
        let raw: Vec<f64> = spectra.iter().map(|s| s.bins()[k].arg()).collect();
        let un = unwrap_phase(&raw);
        let base = un[0];
        phase_curves.insert(k, un.into_iter().map(|p| p - base).collect());
    }
    let ds = ReferenceDataset {
        power_grid: power_grid.to_vec(),
        y_f: spectra.iter().map(|s| s.power_dbm()[kf]).collect(),
        y_im3: spectra.iter().map(|s| s.power_dbm()[k3]).collect(),
        p_in_ref,
        s_r: spectra[ref_at].clone(),
        phase_curves,
        tone_config: setup.clone(),
    };
    ds.validate()?;
    Ok(ds)
}

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(fmt17).collect::<Vec<_>>().join(",")
}

/// Write the sectioned reference CSV.
///
/// ```text
/// # key=value metadata lines
/// [SWEEP]
/// p_in_dbm,y_f_dbm,y_im3_dbm
/// [SPECTRUM]
/// freq_hz,re,im
/// [PHASE]
/// bin,p_in_dbm,phase_rad
/// ```
pub fn save_reference_csv<W: Write>(ds: &ReferenceDataset, mut out: W) -> Result<()> {
    ds.validate()?;
    let t = &ds.tone_config;
    writeln!(out, "# format=multibox-reference version=1")?;
    writeln!(
        out,
        "# sample_rate_hz={} record_len={} ref_impedance_ohms={} floor_dbm={}",
        fmt17(t.sample_rate),
        t.length,
        fmt17(t.ref_impedance),
        fmt17(ds.s_r.floor_dbm())
    )?;
    writeln!(
        out,
        "# p_in_ref_dbm={} fund_freq_hz={} im3_freq_hz={}",
        fmt17(ds.p_in_ref),
        fmt17(t.fund_freq),
        fmt17(t.im3_freq)
    )?;
    for (key, set) in [("if", &t.if_template), ("lo", &t.lo_tones)] {
        writeln!(
            out,
            "# {key}_freqs_hz={} {key}_amps_v={} {key}_phases_rad={}",
            join(set.tones().iter().map(Tone::frequency)),
            join(set.tones().iter().map(Tone::amplitude)),
            join(set.tones().iter().map(Tone::phase))
        )?;
    }
    writeln!(out, "[SWEEP]")?;
    writeln!(out, "p_in_dbm,y_f_dbm,y_im3_dbm")?;
    for i in 0..ds.power_grid.len() {
        writeln!(
            out,
            "{},{},{}",
            fmt17(ds.power_grid[i]),
            fmt17(ds.y_f[i]),
            fmt17(ds.y_im3[i])
        )?;
    }
    writeln!(out, "[SPECTRUM]")?;
    writeln!(out, "freq_hz,re,im")?;
    write_spectrum_rows(&ds.s_r, &mut out)?;
    if !ds.phase_curves.is_empty() {
        writeln!(out, "[PHASE]")?;
        writeln!(out, "bin,p_in_dbm,phase_rad")?;
        for (k, curve) in &ds.phase_curves {
            for (p, v) in ds.power_grid.iter().zip(curve) {
                writeln!(out, "{k},{},{}", fmt17(*p), fmt17(*v))?;
            }
        }
    }
    Ok(())
}

#[derive(PartialEq)]
enum Section {
    Header,
    Sweep,
    Spectrum,
    Phase,
}

fn list(h: &Header, key: &str, line: usize) -> Result<Vec<f64>> {
    h.text(key)?
        .split(',')
        .map(|s| parse_number(s, line))
        .collect()
}

fn tone_set(h: &Header, port: Port, key: &str, line: usize) -> Result<ToneSet> {
    let f = list(h, &format!("{key}_freqs_hz"), line)?;
    let a = list(h, &format!("{key}_amps_v"), line)?;
    let p = list(h, &format!("{key}_phases_rad"), line)?;
    if f.len() != a.len() || f.len() != p.len() {
        return Err(Error::Schema {
            line,
            message: format!("{key} tone lists differ in length"),
        });
    }
    let tones = (0..f.len())
        .map(|i| Tone::new(f[i], a[i], p[i]))
        .collect::<Result<_>>()?;
    ToneSet::new(port, tones)
}

pub fn load_reference_csv<R: BufRead>(input: R) -> Result<ReferenceDataset> {
    let mut header = Header::new(1);
    let mut section = Section::Header;
    let mut grid = Vec::new();
    let mut y_f = Vec::new();
    let mut y_im3 = Vec::new();
    let mut bins = Vec::new();
    let mut phase_rows: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(meta) = t.strip_prefix('#') {
            if section != Section::Header {
                return Err(Error::Schema {
                    line: n,
                    message: "metadata lines must precede the data sections".into(),
                });
            }
            header.absorb(meta, n)?;
            continue;
        }
        match t {
            "[SWEEP]" => section = Section::Sweep,
            "[SPECTRUM]" => section = Section::Spectrum,
            "[PHASE]" => section = Section::Phase,
            "p_in_dbm,y_f_dbm,y_im3_dbm" | "freq_hz,re,im" | "bin,p_in_dbm,phase_rad" => {}
            _ => match section {
                Section::Header => {
                    return Err(Error::Schema {
                        line: n,
                        message: format!("unexpected `{t}` before any section"),
                    })
                }
                Section::Sweep => {
                    let cols: Vec<&str> = t.split(',').collect();
                    if cols.len() != 3 {
                        return Err(Error::Schema {
                            line: n,
                            message: format!(
                                "expected p_in_dbm,y_f_dbm,y_im3_dbm, got {} columns",
                                cols.len()
                            ),
                        });
                    }
                    grid.push(parse_number(cols[0], n)?);
                    if !cols[1].trim().is_empty() {
                        y_f.push(parse_number(cols[1], n)?);
                    }
                    if !cols[2].trim().is_empty() {
                        y_im3.push(parse_number(cols[2], n)?);
                    }
                }
                Section::Spectrum => bins.push(parse_bin_row(t, n)?.1),
                Section::Phase => {
                    let cols: Vec<&str> = t.split(',').collect();
                    if cols.len() != 3 {
                        return Err(Error::Schema {
                            line: n,
                            message: format!(
                                "expected bin,p_in_dbm,phase_rad, got {} columns",
                                cols.len()
                            ),
                        });
                    }
                    let k = cols[0].trim().parse::<usize>().map_err(|_| Error::Schema {
                        line: n,
                        message: format!("`{}` is not a bin index", cols[0]),
                    })?;
                    phase_rows.push((n, k, parse_number(cols[1], n)?, parse_number(cols[2], n)?));
                }
            },
        }
    }
    let fs = header.number("sample_rate_hz")?;
    let len = header.number("record_len")? as usize;
    let r = header.number("ref_impedance_ohms")?;
    let floor = header.number("floor_dbm")?;
    let tone_config = ToneSweep {
        if_template: tone_set(&header, Port::If, "if", 1)?,
        lo_tones: tone_set(&header, Port::Lo, "lo", 1)?,
        fund_freq: header.number("fund_freq_hz")?,
        im3_freq: header.number("im3_freq_hz")?,
        sample_rate: fs,
        length: len,
        ref_impedance: r,
    };
    if len < 2 || bins.len() != len / 2 + 1 {
        return Err(Error::Alignment(format!(
            "record_len={len} implies {} spectrum rows, found {}",
            len / 2 + 1,
            bins.len()
        )));
    }
    let s_r = Spectrum::from_bins(fs / len as f64, len, bins, r, floor)?;
    let mut phase_curves: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (n, k, p, v) in phase_rows {
        let curve = phase_curves.entry(k).or_default();
        match grid.get(curve.len()) {
            Some(&g) if (g - p).abs() <= 1e-9 => curve.push(v),
            _ => {
                return Err(Error::Alignment(format!(
                    "line {n}: phase row for bin {k} at {p} dBm does not follow the sweep grid"
                )))
            }
        }
    }
    let ds = ReferenceDataset {
        power_grid: grid,
        y_f,
        y_im3,
        p_in_ref: header.number("p_in_ref_dbm")?,
        s_r,
        phase_curves,
        tone_config,
    };
    ds.validate()?;
    Ok(ds)
}
