use num_complex::Complex64;

use crate::signal::ComplexWaveform;
use crate::{Error, Result};

/// Gram-Schmidt orthogonalization of the I/Q rails.
///
/// The quadrature rail is made orthogonal to the in-phase rail and both end
/// up with the original in-phase power.
pub fn gsop(w: &ComplexWaveform) -> Result<ComplexWaveform> {
    let s = w.samples();
    let n = s.len().max(1) as f64;
    let p_i = s.iter().map(|v| v.re * v.re).sum::<f64>() / n;
    if p_i.is_nan() || p_i <= 0.0 {
        return Err(Error::Degenerate("in-phase rail has zero power"));
    }
    let rho = s.iter().map(|v| v.re * v.im).sum::<f64>() / n / p_i;
    let q: Vec<f64> = s.iter().map(|v| v.im - rho * v.re).collect();
    let p_q = q.iter().map(|v| v * v).sum::<f64>() / n;
    if p_q.is_nan() || p_q <= 1e-12 * p_i {
        return Err(Error::Degenerate(
            "quadrature rail is fully correlated with in-phase",
        ));
    }
    let g = (p_i / p_q).sqrt();
    w.with_samples(
        s.iter()
            .zip(&q)
            .map(|(v, &q)| Complex64::new(v.re, q * g))
            .collect(),
    )
}
