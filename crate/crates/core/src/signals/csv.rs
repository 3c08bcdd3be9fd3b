//! Plain-text exchange of sampled records and spectra.
//!
//! Both formats start with one metadata line of `key=value` pairs after a
//! `#`, then one data row per line. Numbers are written with 17 significant
//! digits so a write/read cycle is lossless.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{SampledSignal, Spectrum};
use crate::error::{Error, Result};
use crate::fmt17;

pub fn write_signal_csv<W: Write>(
    signal: &SampledSignal,
    ref_impedance: f64,
    mut out: W,
) -> Result<()> {
    writeln!(
        out,
        "# sample_rate_hz={} ref_impedance_ohms={}",
        fmt17(signal.sample_rate()),
        fmt17(ref_impedance)
    )?;
    for x in signal.samples() {
        writeln!(out, "{}", fmt17(*x))?;
    }
    Ok(())
}

/// Returns the record and the reference impedance stored with it.
pub fn read_signal_csv<R: BufRead>(input: R) -> Result<(SampledSignal, f64)> {
    let mut lines = input.lines().enumerate();
    let meta = parse_header(&mut lines)?;
    let fs = meta.number("sample_rate_hz")?;
    let r = meta.number("ref_impedance_ohms")?;
    let mut samples = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        samples.push(parse_number(line.trim(), i + 1)?);
    }
    Ok((SampledSignal::new(fs, samples)?, r))
}

pub fn write_spectrum_csv<W: Write>(spectrum: &Spectrum, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# sample_rate_hz={} ref_impedance_ohms={} record_len={} floor_dbm={}",
        fmt17(spectrum.sample_rate()),
        fmt17(spectrum.ref_impedance()),
        spectrum.record_len(),
        fmt17(spectrum.floor_dbm())
    )?;
    writeln!(out, "freq_hz,re,im")?;
    write_spectrum_rows(spectrum, &mut out)
}

pub(crate) fn write_spectrum_rows<W: Write>(spectrum: &Spectrum, out: &mut W) -> Result<()> {
    for (k, b) in spectrum.bins().iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            fmt17(spectrum.frequency(k)),
            fmt17(b.re),
            fmt17(b.im)
        )?;
    }
    Ok(())
}

pub fn read_spectrum_csv<R: BufRead>(input: R) -> Result<Spectrum> {
    let mut lines = input.lines().enumerate();
    let meta = parse_header(&mut lines)?;
    let fs = meta.number("sample_rate_hz")?;
    let r = meta.number("ref_impedance_ohms")?;
    let len = meta.number("record_len")? as usize;
    let floor = meta.number("floor_dbm").unwrap_or(super::DEFAULT_FLOOR_DBM);
    let mut bins = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t == "freq_hz,re,im" {
            continue;
        }
        let (_, b) = parse_bin_row(t, i + 1)?;
        bins.push(b);
    }
    if len == 0 || bins.len() != len / 2 + 1 {
        return Err(Error::Schema {
            line: 1,
            message: format!(
                "record_len={len} implies {} bins, found {}",
                len / 2 + 1,
                bins.len()
            ),
        });
    }
    Spectrum::from_bins(fs / len as f64, len, bins, r, floor)
}

pub(crate) fn parse_bin_row(row: &str, line: usize) -> Result<(f64, Complex64)> {
    let cols: Vec<&str> = row.split(',').collect();
    if cols.len() != 3 {
        return Err(Error::Schema {
            line,
            message: format!("expected freq_hz,re,im, got {} columns", cols.len()),
        });
    }
    Ok((
        parse_number(cols[0], line)?,
        Complex64::new(parse_number(cols[1], line)?, parse_number(cols[2], line)?),
    ))
}

pub(crate) fn parse_number(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Schema {
        line,
        message: format!("`{s}` is not a number"),
    })
}

pub(crate) struct Header {
    line: usize,
    values: BTreeMap<String, String>,
}

impl Header {
    pub(crate) fn new(line: usize) -> Self {
        Self {
            line,
            values: BTreeMap::new(),
        }
    }

    /// Absorb the `key=value` tokens of a `#` line.
    pub(crate) fn absorb(&mut self, text: &str, line: usize) -> Result<()> {
        for tok in text.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or(Error::Schema {
                line,
                message: format!("metadata token `{tok}` is not key=value"),
            })?;
            self.values.insert(k.to_string(), v.to_string());
        }
        Ok(())
    }

    pub(crate) fn text(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or(Error::Schema {
                line: self.line,
                message: format!("missing metadata key `{key}`"),
            })
    }

    pub(crate) fn number(&self, key: &str) -> Result<f64> {
        parse_number(self.text(key)?, self.line)
    }
}

fn parse_header<I>(lines: &mut I) -> Result<Header>
where
    I: Iterator<Item = (usize, std::io::Result<String>)>,
{
    let (i, first) = lines.next().ok_or(Error::Schema {
        line: 1,
        message: "empty file".into(),
    })?;
    let first = first?;
    let body = first.trim().strip_prefix('#').ok_or(Error::Schema {
        line: i + 1,
        message: "first line must be a `#` metadata header".into(),
    })?;
    let mut h = Header::new(i + 1);
    h.absorb(body, i + 1)?;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{compute_spectrum, synth_multitone, Port, Tone, ToneSet};

    fn record() -> SampledSignal {
        let tones = ToneSet::new(
            Port::If,
            vec![
                Tone::new(1e9, 0.123456789, 0.3).unwrap(),
                Tone::new(3e9, 1.0 / 3.0, 2.0).unwrap(),
            ],
        )
        .unwrap();
        synth_multitone(&tones, 16e9, 64).unwrap()
    }

    #[test]
    fn signal_round_trip_is_exact() {
        let s = record();
        let mut buf = Vec::new();
        write_signal_csv(&s, 50.0, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# sample_rate_hz="));
        assert!(!text.contains('\r'));
        let (back, r) = read_signal_csv(&buf[..]).unwrap();
        assert_eq!(back, s);
        assert_eq!(r, 50.0);
    }

    #[test]
    fn spectrum_round_trip_is_exact() {
        let spec = compute_spectrum(&record(), 75.0);
        let mut buf = Vec::new();
        write_spectrum_csv(&spec, &mut buf).unwrap();
        let back = read_spectrum_csv(&buf[..]).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn bad_rows_report_line() {
        let text = "# sample_rate_hz=1e9 ref_impedance_ohms=50\n1.0\nabc\n";
        match read_signal_csv(text.as_bytes()) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_signal_csv("1.0\n2.0\n".as_bytes()).is_err());
    }
}
