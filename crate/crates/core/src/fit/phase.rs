use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::PhasePolynomial;
use crate::oracle::ReferenceDataset;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseFit {
    pub polynomials: BTreeMap<usize, PhasePolynomial>,
    /// RMS of the fit residual per bin, in radians.
    pub rms: BTreeMap<usize, f64>,
}

/// Least-squares polynomial of degree `n_phase - 1` in dBm through one
/// phase curve.
pub fn fit_phase_curve(
    power_grid: &[f64],
    curve: &[f64],
    n_phase: usize,
) -> Result<(PhasePolynomial, f64)> {
    if power_grid.len() < n_phase {
        return Err(Error::InsufficientPoints {
            needed: n_phase,
            got: power_grid.len(),
        });
    }
    if curve.len() != power_grid.len() {
        return Err(Error::Alignment(format!(
            "phase curve has {} points, power grid {}",
            curve.len(),
            power_grid.len()
        )));
    }
    let m = power_grid.len();
    let a = DMatrix::from_fn(m, n_phase, |r, c| power_grid[r].powi(c as i32));
    let y = DVector::from_column_slice(curve);
    let theta = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::InvalidConfig(format!("phase least squares failed: {e}")))?;
    let resid = &a * &theta - &y;
    let rms = (resid.norm_squared() / m as f64).sqrt();
    Ok((PhasePolynomial::new(theta.iter().copied().collect()), rms))
}

/// One phase polynomial per fundamental bin, fitted to the curves as given.
pub fn fit_phase(refs: &ReferenceDataset, n_phase: usize) -> Result<PhaseFit> {
    let mut out = PhaseFit::default();
    if n_phase == 0 {
        return Ok(out);
    }
    for (&k, curve) in &refs.phase_curves {
        let (p, rms) = fit_phase_curve(&refs.power_grid, curve, n_phase)?;
        out.polynomials.insert(k, p);
        out.rms.insert(k, rms);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_curve() {
        let grid: Vec<f64> = (0..10).map(|i| -30.0 + 3.0 * i as f64).collect();
        let (p, rms) = fit_phase_curve(&grid, &[0.7; 10], 3).unwrap();
        assert!((p.coefficients()[0] - 0.7).abs() < 1e-12);
        assert!(p.coefficients()[1..].iter().all(|c| c.abs() < 1e-12));
        assert!(rms < 1e-12);
    }

    #[test]
    fn linear_curve() {
        let grid: Vec<f64> = (0..31).map(|i| -30.0 + i as f64).collect();
        let curve: Vec<f64> = grid.iter().map(|p| 0.02 * p).collect();
        let (p, _) = fit_phase_curve(&grid, &curve, 2).unwrap();
        assert!(p.coefficients()[0].abs() < 1e-10);
        assert!((p.coefficients()[1] - 0.02).abs() < 1e-10);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_phase_curve(&[-10.0, 0.0], &[0.0, 0.0], 3),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
    }
}
