//! FFT plumbing shared by the spectral and radar code.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized forward DFT.
pub fn fft(buf: &mut [Complex64]) {
    if buf.len() < 2 {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// In-place unnormalized inverse DFT (no 1/N factor).
pub fn ifft(buf: &mut [Complex64]) {
    if buf.len() < 2 {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}

pub fn fft_real(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft(&mut buf);
    buf
}

/// Inverse DFT normalized by 1/N.
pub fn ifft_normalized(mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
    let n = spectrum.len() as f64;
    ifft(&mut spectrum);
    for v in spectrum.iter_mut() {
        *v /= n;
    }
    spectrum
}

/// Analytic signal from the full DFT of a real record: positive bins doubled,
/// negative bins removed, DC and Nyquist kept once.
pub fn analytic_from_spectrum(mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
    let n = spectrum.len();
    for (k, v) in spectrum.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == n / 2) {
            continue;
        }
        if k < n.div_ceil(2) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft_normalized(spectrum)
}

pub fn analytic_signal(samples: &[f64]) -> Vec<Complex64> {
    analytic_from_spectrum(fft_real(samples))
}

/// Signed frequency index of DFT bin `k` in a length-`n` transform; the
/// Nyquist bin maps to `-n/2`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n.div_ceil(2) {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Inverse of [`signed_index`].
pub fn wrap_index(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Nearest-2pi continuation; the first sample fixes the branch.
pub fn unwrap_phase(phase: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phase.len());
    let mut offset = 0.0;
    for (i, &p) in phase.iter().enumerate() {
        if i > 0 {
            let prev = phase[i - 1];
            offset -= std::f64::consts::TAU * ((p - prev) / std::f64::consts::TAU).round();
        }
        out.push(p + offset);
    }
    out
}
