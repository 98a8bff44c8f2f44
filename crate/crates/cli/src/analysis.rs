//! Post-processing of sweep results.

/// Abscissa where a falling BER curve first drops below `threshold`, by
/// linear interpolation of `log10(ber)` between the bracketing points.
/// Points with zero BER count as below any threshold. `None` if the curve
/// never crosses.
pub fn threshold_crossing(points: &[(f64, f64)], threshold: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if !(b0 >= threshold && b1 < threshold) {
            return None;
        }
        if b1 <= 0.0 {
            return Some(x1);
        }
        let (l0, l1, lt) = (b0.log10(), b1.log10(), threshold.log10());
        Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1))
    })
}

/// Index of the smallest tap count whose BER is within 10% of the curve's
/// floor (its minimum BER).
pub fn knee_index(bers: &[f64]) -> Option<usize> {
    let floor = bers
        .iter()
        .copied()
        .filter(|b| b.is_finite())
        .reduce(f64::min)?;
    bers.iter().position(|&b| b <= floor * 1.1)
}

/// Whether two error counts over `bits` each are consistent with one
/// underlying BER at about three standard deviations (binomial).
pub fn within_counting_noise(errors_a: u64, bits_a: u64, errors_b: u64, bits_b: u64) -> bool {
    let pa = errors_a as f64 / bits_a as f64;
    let pb = errors_b as f64 / bits_b as f64;
    let pooled = (errors_a + errors_b) as f64 / (bits_a + bits_b) as f64;
    let sigma = (pooled * (1.0 - pooled) * (1.0 / bits_a as f64 + 1.0 / bits_b as f64)).sqrt();
    (pa - pb).abs() <= 3.0 * sigma.max(1.0 / (bits_a.min(bits_b)) as f64)
}
