//! Thin helpers over `rustfft` with a per-thread planner.
//!
//! Forward transforms are unnormalized; [`ifft`] divides by the length so that
//! `ifft(fft(x)) == x`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub fn fft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

pub fn ifft_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
    let scale = 1.0 / buf.len() as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    buf
}

pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    ifft_in_place(&mut buf);
    buf
}

/// Frequency (Hz) of DFT bin `k` for an `n`-point transform at `sample_rate`,
/// mapped to `[-fs/2, fs/2)`.
pub fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    signed_bin(k, n) as f64 * sample_rate / n as f64
}

/// Signed index of bin `k`: `k` for the lower half, `k - n` above `n/2`.
pub fn signed_bin(k: usize, n: usize) -> isize {
    if k < n.div_ceil(2) {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Storage index of a signed bin.
pub fn wrap_bin(k: isize, n: usize) -> usize {
    k.rem_euclid(n as isize) as usize
}

/// Circular convolution of `x` with a zero-phase FIR whose center tap sits at
/// `taps[taps.len() / 2]`. Taps longer than `x` are folded onto the circle.
pub fn circular_filter_centered(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let center = (taps.len() / 2) as isize;
    let mut h = vec![Complex64::new(0.0, 0.0); n];
    for (i, &t) in taps.iter().enumerate() {
        h[wrap_bin(i as isize - center, n)] += t;
    }
    fft_in_place(&mut h);
    let mut buf = x.to_vec();
    fft_in_place(&mut buf);
    for (b, hv) in buf.iter_mut().zip(&h) {
        *b *= hv;
    }
    ifft_in_place(&mut buf);
    buf
}
