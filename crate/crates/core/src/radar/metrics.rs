use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::rdm::{RangeDopplerMap, MAP_FLOOR_DB};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarMetrics {
    pub sinr: f64,
    pub pslr: f64,
    pub islr: f64,
    /// `(range cell, doppler cell)` of each detected peak, strongest first.
    pub peak_positions: Vec<(usize, usize)>,
}

fn to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * ratio.log10()).max(MAP_FLOOR_DB)
    } else {
        MAP_FLOOR_DB
    }
}

/// Cells within `h` of `c` on a circular axis of length `n`.
fn near(a: usize, c: usize, h: usize, n: usize) -> bool {
    let d = a.abs_diff(c);
    d.min(n - d) <= h
}

/// Detect `n_targets` peaks and measure the image.
///
/// Each detected target masks a band of `2 h + 1` range cells across all
/// Doppler cells and `2 h + 1` Doppler cells across all range cells, which
/// holds its full row, its full column and the rectangle around its peak.
/// SINR compares the strongest peak against the mean of what is left.
/// PSLR and ISLR are read on the circular Doppler cut through the strongest
/// peak, with the mainlobe running to the first local minimum on each side.
pub fn image_metrics(
    rdm: &RangeDopplerMap,
    n_targets: usize,
    mask_half_widths: (usize, usize),
) -> Result<RadarMetrics> {
    if n_targets == 0 {
        return Err(Error::InvalidConfig(
            "need at least one target to measure".into(),
        ));
    }
    let (nr, nd) = rdm.dim();
    let (hr, hd) = mask_half_widths;
    let lin: Array2<f64> = rdm.power.mapv(|db| 10f64.powf(db / 10.0));
    let mut masked = Array2::from_elem((nr, nd), false);
    let mut peaks = Vec::with_capacity(n_targets);
    for _ in 0..n_targets {
        let best = lin.indexed_iter().filter(|(ix, _)| !masked[*ix]).fold(
            None,
            |acc: Option<((usize, usize), f64)>, (ix, &v)| match acc {
                Some((_, b)) if b >= v => acc,
                _ => Some((ix, v)),
            },
        );
        let Some(((r0, d0), _)) = best else {
            return Err(Error::MaskCoversMap);
        };
        peaks.push((r0, d0));
        for ((r, d), m) in masked.indexed_iter_mut() {
            if near(r, r0, hr, nr) || near(d, d0, hd, nd) {
                *m = true;
            }
        }
    }

    let (sum, count) = lin
        .indexed_iter()
        .filter(|(ix, _)| !masked[*ix])
        .fold((0.0, 0usize), |(s, c), (_, &v)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::MaskCoversMap);
    }
    let (r0, d0) = peaks[0];
    let peak = lin[(r0, d0)];
    let sinr = to_db(peak / (sum / count as f64));

    let cut: Vec<f64> = lin.row(r0).to_vec();
    let (pslr, islr) = cut_sidelobes(&cut, d0);
    Ok(RadarMetrics {
        sinr,
        pslr,
        islr,
        peak_positions: peaks,
    })
}

/// `(PSLR, ISLR)` in dB of a circular power cut with its peak at `center`.
pub fn cut_sidelobes(cut: &[f64], center: usize) -> (f64, f64) {
    let n = cut.len();
    let mut main = vec![false; n];
    main[center] = true;
    for dir in [1i64, -1] {
        let mut i = center;
        for _ in 1..n {
            let j = (i as i64 + dir).rem_euclid(n as i64) as usize;
            if main[j] || cut[j] >= cut[i] {
                break;
            }
            main[j] = true;
            i = j;
        }
    }
    let (mut side_max, mut side_sum, mut main_sum) = (0.0f64, 0.0, 0.0);
    for (i, &v) in cut.iter().enumerate() {
        if main[i] {
            main_sum += v;
        } else {
            side_max = side_max.max(v);
            side_sum += v;
        }
    }
    (to_db(side_max / cut[center]), to_db(side_sum / main_sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(power: Array2<f64>) -> RangeDopplerMap {
        let (nr, nd) = power.dim();
        RangeDopplerMap {
            power,
            range_axis: vec![0.0; nr],
            doppler_axis: vec![0.0; nd],
            zero_pad: 1,
        }
    }

    #[test]
    fn delta_over_flat_floor() {
        let mut p = Array2::from_elem((32, 16), -60.0);
        p[(5, 9)] = 0.0;
        let m = image_metrics(&map(p), 1, (0, 0)).unwrap();
        assert!((m.sinr - 60.0).abs() < 1e-9);
        assert_eq!(m.peak_positions, vec![(5, 9)]);
        assert!((m.pslr + 60.0).abs() < 1e-9);
    }

    #[test]
    fn sinr_ignores_global_scaling() {
        let p = Array2::from_shape_fn((16, 16), |(r, d)| -(((r * 7 + d * 3) % 40) as f64));
        let a = image_metrics(&map(p.clone()), 2, (1, 1)).unwrap();
        let b = image_metrics(&map(p.mapv(|v| v - 17.0)), 2, (1, 1)).unwrap();
        assert!((a.sinr - b.sinr).abs() < 1e-9);
        assert_eq!(a.peak_positions, b.peak_positions);
    }

    #[test]
    fn masks_can_cover_everything() {
        let p = Array2::from_elem((8, 8), -10.0);
        assert!(matches!(
            image_metrics(&map(p.clone()), 1, (4, 0)),
            Err(Error::MaskCoversMap)
        ));
        assert!(image_metrics(&map(p), 0, (0, 0)).is_err());
    }

    #[test]
    fn second_target_is_found_outside_first_mask() {
        let mut p = Array2::from_elem((32, 32), -80.0);
        p[(4, 4)] = 0.0;
        p[(4, 5)] = -3.0;
        p[(20, 20)] = -6.0;
        let m = image_metrics(&map(p), 2, (2, 2)).unwrap();
        assert_eq!(m.peak_positions, vec![(4, 4), (20, 20)]);
    }

    #[test]
    fn mainlobe_stops_at_first_minimum() {
        let cut = [0.01, 0.2, 1.0, 0.5, 0.05, 0.1, 0.02, 0.002];
        let (pslr, islr) = cut_sidelobes(&cut, 2);
        // mainlobe = 0.002 (wraps), 0.01, 0.2, 1.0, 0.5, 0.05
        assert!((pslr - 10.0 * 0.1f64.log10()).abs() < 1e-12);
        let main = 0.002 + 0.01 + 0.2 + 1.0 + 0.5 + 0.05;
        assert!((islr - 10.0 * (0.12f64 / main).log10()).abs() < 1e-12);
    }
}
