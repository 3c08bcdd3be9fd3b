//! Nelder-Mead simplex search on the unit box.
//!
//! Every trial point is clamped to `[0, 1]^d` before it is evaluated, so the
//! objective never sees a point outside the box. When the simplex
//! converges the search restarts around the best point with a smaller
//! simplex, until a restart no longer improves by more than the tolerance
//! or the evaluation budget runs out.

use crate::model::Bound;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmOptions {
    /// Stop when the simplex's objective spread falls below this.
    pub tolerance: f64,
    pub max_evals: usize,
    /// Edge length of the initial simplex in unit-box coordinates.
    pub initial_step: f64,
    pub max_restarts: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_evals: 4000,
            initial_step: 0.1,
            max_restarts: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub initial: f64,
    pub evals: usize,
    /// Best value after each iteration; never increases.
    pub trace: Vec<f64>,
}

struct Counter<'a, F: FnMut(&[f64]) -> f64> {
    f: &'a mut F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<'_, F> {
    fn eval(&mut self, x: &mut [f64]) -> f64 {
        for v in x.iter_mut() {
            *v = v.clamp(0.0, 1.0);
        }
        self.evals += 1;
        let y = (self.f)(x);
        if y.is_nan() {
            f64::INFINITY
        } else {
            y
        }
    }
}

fn toward(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NmOptions) -> NmOutcome {
    let d = x0.len();
    let mut c = Counter {
        f: &mut f,
        evals: 0,
    };
    let mut best_x: Vec<f64> = x0.to_vec();
    let mut best_f = c.eval(&mut best_x);
    let initial = best_f;
    let mut trace = vec![best_f];
    if d == 0 {
        return NmOutcome {
            x: best_x,
            f: best_f,
            initial,
            evals: c.evals,
            trace,
        };
    }
    let mut step = opts.initial_step;
    for restart in 0..=opts.max_restarts {
        if c.evals >= opts.max_evals {
            break;
        }
        let start_f = best_f;
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(best_x.clone(), best_f)];
        for i in 0..d {
            let mut p = best_x.clone();
            p[i] = if p[i] + step <= 1.0 {
                p[i] + step
            } else {
                p[i] - step
            };
            let y = c.eval(&mut p);
            simplex.push((p, y));
        }
        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[0].1 < best_f {
                best_f = simplex[0].1;
                best_x = simplex[0].0.clone();
            }
            trace.push(best_f);
            let spread = simplex[d].1 - simplex[0].1;
            let size = simplex
                .iter()
                .skip(1)
                .map(|(p, _)| {
                    p.iter()
                        .zip(&simplex[0].0)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread <= opts.tolerance || size < 1e-14 || c.evals >= opts.max_evals {
                break;
            }
            let mut centroid = vec![0.0; d];
            for (p, _) in &simplex[..d] {
                for (ci, pi) in centroid.iter_mut().zip(p) {
                    *ci += pi / d as f64;
                }
            }
            let worst = simplex[d].clone();
            let raw = toward(&centroid, &worst.0, -1.0);
            let mut xr = raw.clone();
            let fr = c.eval(&mut xr);
            let clamped = xr != raw;
            if fr < simplex[0].1 {
                let mut xe = toward(&centroid, &worst.0, -2.0);
                let fe = c.eval(&mut xe);
                simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[d - 1].1 {
                simplex[d] = (xr, fr);
            } else {
                // contracting toward a clamped reflection would flatten the
                // simplex onto the box face
                let (mut xc, outside) = if fr < worst.1 && !clamped {
                    (toward(&centroid, &xr, 0.5), true)
                } else {
                    (toward(&centroid, &worst.0, 0.5), false)
                };
                let fc = c.eval(&mut xc);
                if (outside && fc <= fr) || (!outside && fc < worst.1) {
                    simplex[d] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        let mut p = toward(&x_best, &item.0, 0.5);
                        let y = c.eval(&mut p);
                        *item = (p, y);
                    }
                }
            }
        }
        if start_f - best_f <= opts.tolerance && restart > 0 {
            break;
        }
        step *= 0.5;
    }
    NmOutcome {
        x: best_x,
        f: best_f,
        initial,
        evals: c.evals,
        trace,
    }
}

/// Affine map between a box of bounds and the unit box. Collapsed bounds
/// (`lower == upper`) are pinned and take no search dimension.
#[derive(Debug, Clone)]
pub struct BoxMap {
    bounds: Vec<Bound>,
    free: Vec<usize>,
}

impl BoxMap {
    pub fn new(bounds: &[Bound]) -> Self {
        Self {
            bounds: bounds.to_vec(),
            free: (0..bounds.len())
                .filter(|&i| bounds[i].1 > bounds[i].0)
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn to_coefficients(&self, u: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.bounds.iter().map(|b| b.0).collect();
        for (&i, &ui) in self.free.iter().zip(u) {
            let (lo, hi) = self.bounds[i];
            // exact endpoints, so clamped points stay inside the bounds
            out[i] = if ui >= 1.0 {
                hi
            } else {
                (lo + ui * (hi - lo)).clamp(lo, hi)
            };
        }
        out
    }

    /// Unit-box coordinates of `x`, clamped into the bounds first.
    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        self.free
            .iter()
            .map(|&i| {
                let (lo, hi) = self.bounds[i];
                ((x[i].clamp(lo, hi) - lo) / (hi - lo)).clamp(0.0, 1.0)
            })
            .collect()
    }
}
