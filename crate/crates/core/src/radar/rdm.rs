use ndarray::Array2;
use num_complex::Complex64;

use crate::dsp;
use crate::error::{Error, Result};
use crate::signals::OfdmFrameConfig;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Power level given to empty cells, in dB below the peak.
pub const MAP_FLOOR_DB: f64 = -400.0;

/// Peak-normalized range-Doppler image. Rows are range cells, columns are
/// Doppler cells with zero Doppler at column `N_doppler / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerMap {
    pub power: Array2<f64>,
    pub range_axis: Vec<f64>,
    pub doppler_axis: Vec<f64>,
    pub zero_pad: usize,
}

impl RangeDopplerMap {
    pub fn dim(&self) -> (usize, usize) {
        self.power.dim()
    }

    /// Doppler cut at one range cell.
    pub fn doppler_cut(&self, row: usize) -> Vec<f64> {
        self.power.row(row).to_vec()
    }
}

/// Element-wise spectral division followed by the range and Doppler
/// transforms, before taking magnitudes. Shape is
/// `(subcarriers * pad) x (symbols * pad)` with fftshifted Doppler.
pub fn range_doppler_complex(
    f_tx: &Array2<Complex64>,
    f_rx: &Array2<Complex64>,
    zero_pad: usize,
    cfg: &OfdmFrameConfig,
) -> Result<Array2<Complex64>> {
    let (n, m) = f_tx.dim();
    if f_rx.dim() != (n, m) || (n, m) != (cfg.subcarriers, cfg.symbols) {
        return Err(Error::InvalidConfig(format!(
            "grid shapes {:?} and {:?} do not match a {} x {} frame",
            f_tx.dim(),
            f_rx.dim(),
            cfg.subcarriers,
            cfg.symbols
        )));
    }
    if zero_pad == 0 {
        return Err(Error::InvalidConfig("zero_pad must be at least 1".into()));
    }
    let (nr, nd) = (n * zero_pad, m * zero_pad);
    let mut d = Array2::<Complex64>::zeros((n, m));
    for ((sc, sym), v) in d.indexed_iter_mut() {
        let tx = f_tx[(sc, sym)];
        if tx.norm_sqr() == 0.0 {
            if cfg.is_active(sc) {
                return Err(Error::ZeroTxSymbol {
                    subcarrier: sc,
                    symbol: sym,
                });
            }
            continue;
        }
        *v = f_rx[(sc, sym)] / tx;
    }

    let mut range = Array2::<Complex64>::zeros((nr, m));
    let mut buf = vec![Complex64::new(0.0, 0.0); nr];
    for sym in 0..m {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for sc in 0..n {
            buf[sc] = d[(sc, sym)];
        }
        dsp::ifft(&mut buf);
        for (r, b) in buf.iter().enumerate() {
            range[(r, sym)] = b / n as f64;
        }
    }

    let mut out = Array2::<Complex64>::zeros((nr, nd));
    let mut buf = vec![Complex64::new(0.0, 0.0); nd];
    for r in 0..nr {
        buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for sym in 0..m {
            buf[sym] = range[(r, sym)];
        }
        dsp::fft(&mut buf);
        for (c, b) in buf.iter().enumerate() {
            out[(r, (c + nd / 2) % nd)] = b / m as f64;
        }
    }
    Ok(out)
}

/// Peak-normalized dB image of [`range_doppler_complex`].
pub fn range_doppler(
    f_tx: &Array2<Complex64>,
    f_rx: &Array2<Complex64>,
    zero_pad: usize,
    cfg: &OfdmFrameConfig,
) -> Result<RangeDopplerMap> {
    let z = range_doppler_complex(f_tx, f_rx, zero_pad, cfg)?;
    let (nr, nd) = z.dim();
    let p = z.mapv(|v| v.norm_sqr());
    let peak = p.iter().cloned().fold(0.0, f64::max);
    let power = if peak > 0.0 {
        p.mapv(|v| {
            if v > 0.0 {
                (10.0 * (v / peak).log10()).max(MAP_FLOOR_DB)
            } else {
                MAP_FLOOR_DB
            }
        })
    } else {
        Array2::from_elem((nr, nd), MAP_FLOOR_DB)
    };
    let t_frame = cfg.symbols as f64 * cfg.symbol_duration();
    let range_axis = (0..nr)
        .map(|r| SPEED_OF_LIGHT * r as f64 / (2.0 * cfg.bandwidth * zero_pad as f64))
        .collect();
    let doppler_axis = (0..nd)
        .map(|c| (c as f64 - (nd / 2) as f64) / (t_frame * zero_pad as f64))
        .collect();
    Ok(RangeDopplerMap {
        power,
        range_axis,
        doppler_axis,
        zero_pad,
    })
}
