use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Odd-order memoryless polynomial. `coefficients[i]` multiplies `x^(2i+1)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolynomialBlock {
    coefficients: Vec<f64>,
}

impl PolynomialBlock {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn zeros(count: usize) -> Self {
        Self::new(vec![0.0; count])
    }

    /// Block holding only `gain * x`.
    pub fn linear(gain: f64) -> Self {
        Self::new(vec![gain])
    }

    /// Build from explicit `(order, coefficient)` pairs; orders must be odd.
    pub fn from_orders(terms: &[(usize, f64)]) -> Result<Self> {
        let mut c = Vec::new();
        for &(order, value) in terms {
            if order % 2 == 0 {
                return Err(Error::EvenOrder(order));
            }
            let i = order / 2;
            if c.len() <= i {
                c.resize(i + 1, 0.0);
            }
            c[i] += value;
        }
        Ok(Self::new(c))
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Highest order represented, or 0 for an empty block.
    pub fn max_order(&self) -> usize {
        if self.coefficients.is_empty() {
            0
        } else {
            2 * self.coefficients.len() - 1
        }
    }

    pub fn orders(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.coefficients.len()).map(|i| 2 * i + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        let inner = self
            .coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x2 + c);
        x * inner
    }
}

/// Sample-wise evaluation of an odd polynomial block.
pub fn eval_poly(block: &PolynomialBlock, samples: &[f64]) -> Vec<f64> {
    samples.iter().map(|&x| block.eval(x)).collect()
}

/// Phase offset `sum_l theta_l * P^l` with `P` in dBm.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhasePolynomial {
    coefficients: Vec<f64>,
}

impl PhasePolynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, p_in_dbm: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * p_in_dbm + c)
    }

    /// Coefficient-wise mean of several polynomials.
    pub fn mean<'a>(polys: impl IntoIterator<Item = &'a PhasePolynomial>) -> Option<Self> {
        let mut sum: Vec<f64> = Vec::new();
        let mut n = 0usize;
        for p in polys {
            if sum.len() < p.coefficients.len() {
                sum.resize(p.coefficients.len(), 0.0);
            }
            for (s, c) in sum.iter_mut().zip(&p.coefficients) {
                *s += c;
            }
            n += 1;
        }
        (n > 0).then(|| Self::new(sum.into_iter().map(|s| s / n as f64).collect()))
    }
}
