use num_complex::Complex64;

use crate::fft::{fft_in_place, ifft_in_place};
use crate::signal::ComplexWaveform;
use crate::{Error, Result};

/// Minimum known symbols per reference sequence.
pub const MIN_REFERENCE_LEN: usize = 256;
/// Required ratio of the correlation peak to the median of the metric.
pub const PEAK_TO_MEDIAN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    /// Sample index of reference symbol 0 in the input.
    pub offset: usize,
    pub peak_to_median: f64,
}

/// Locates the known symbols in a 2 samples/symbol stream.
///
/// Each reference sequence (for example the preambles carried on X and on Y)
/// is cross-correlated circularly with the input and the squared magnitudes
/// are summed. Because only magnitudes enter, the metric does not depend on
/// the carrier phase or on how the received field mixes the references.
pub fn find_offset(w: &ComplexWaveform, references: &[&[Complex64]]) -> Result<SyncResult> {
    let n = w.len();
    if references.is_empty() {
        return Err(Error::param("references", "no reference sequence"));
    }
    for r in references {
        if r.len() < MIN_REFERENCE_LEN {
            return Err(Error::param(
                "references",
                format!("{} symbols, need at least {MIN_REFERENCE_LEN}", r.len()),
            ));
        }
        if 2 * r.len() > n {
            return Err(Error::param("references", "longer than the input"));
        }
    }
    let mut spec = w.samples().to_vec();
    fft_in_place(&mut spec);
    let mut metric = vec![0.0; n];
    for r in references {
        let mut up = vec![Complex64::new(0.0, 0.0); n];
        for (k, &s) in r.iter().enumerate() {
            up[2 * k] = s;
        }
        fft_in_place(&mut up);
        for (u, x) in up.iter_mut().zip(&spec) {
            *u = x * u.conj();
        }
        ifft_in_place(&mut up);
        for (m, c) in metric.iter_mut().zip(&up) {
            *m += c.norm_sqr();
        }
    }
    let (offset, peak) = metric
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    let mut sorted = metric;
    let mid = sorted.len() / 2;
    let median = *sorted.select_nth_unstable_by(mid, f64::total_cmp).1;
    let ratio = if median > 0.0 {
        peak / median
    } else {
        f64::INFINITY
    };
    if ratio.is_nan() || ratio < PEAK_TO_MEDIAN || peak <= 0.0 {
        return Err(Error::SyncFailure {
            ratio,
            threshold: PEAK_TO_MEDIAN,
        });
    }
    Ok(SyncResult {
        offset,
        peak_to_median: ratio,
    })
}

/// Circularly aligns the input so that its first sample is reference symbol 0.
pub fn synchronize(
    w: &ComplexWaveform,
    references: &[&[Complex64]],
) -> Result<(ComplexWaveform, SyncResult)> {
    let r = find_offset(w, references)?;
    Ok((w.rotated_left(r.offset), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::rotation_matrix;
    use crate::signal::{qam_map, Constellation, RrcFilter};
    use crate::tx::{alamouti_encode, prbs};

    fn frame(n_sym: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = Constellation::qam(16).unwrap();
        let s = qam_map(&prbs(n_sym * 4, 21), &c).unwrap();
        let f = alamouti_encode(&s).unwrap();
        (f.ex, f.ey)
    }

    fn received(
        ex: &[Complex64],
        ey: &[Complex64],
        az: f64,
        el: f64,
        phase: f64,
    ) -> ComplexWaveform {
        let rrc = RrcFilter::new(0.1, 2, 64).unwrap();
        let x = rrc.shape_periodic(ex, 1.0).unwrap();
        let y = rrc.shape_periodic(ey, 1.0).unwrap();
        let m = rotation_matrix(az, el).m;
        let rot = Complex64::from_polar(1.0, phase);
        let s = x
            .samples()
            .iter()
            .zip(y.samples())
            .map(|(a, b)| (m[0][0].conj() * a + m[1][0].conj() * b) * rot)
            .collect();
        rrc.filter_periodic(&x.with_samples(s).unwrap()).unwrap()
    }

    #[test]
    fn zero_offset() {
        let (ex, ey) = frame(4096);
        let w = received(&ex, &ey, 0.0, 0.0, 0.0);
        let r = find_offset(&w, &[&ex[..512], &ey[..512]]).unwrap();
        assert_eq!(r.offset, 0);
    }

    #[test]
    fn known_shift_and_rotation() {
        let (ex, ey) = frame(4096);
        for (az, el, ph) in [(0.0, 0.0, 0.0), (90.0, 0.0, 1.0), (37.0, -61.0, 2.5)] {
            let w = received(&ex, &ey, az, el, ph);
            let shifted = w.rotated_left(w.len() - 1234);
            let (aligned, r) = synchronize(&shifted, &[&ex[..512], &ey[..512]]).unwrap();
            assert_eq!(r.offset, 1234, "az {az} el {el}");
            assert!(r.peak_to_median > 100.0);
            assert_eq!(aligned.samples(), w.samples());
        }
    }

    #[test]
    fn silent_input_fails() {
        let (ex, ey) = frame(4096);
        let w = ComplexWaveform::new(vec![Complex64::new(0.0, 0.0); 8192], 1.0).unwrap();
        assert!(matches!(
            find_offset(&w, &[&ex[..512], &ey[..512]]),
            Err(Error::SyncFailure { .. })
        ));
        assert!(find_offset(&w, &[&ex[..100]]).is_err());
    }
}
