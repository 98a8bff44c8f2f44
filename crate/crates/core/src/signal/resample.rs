use num_complex::Complex64;

use super::ComplexWaveform;
use crate::fft::{fft_in_place, ifft_in_place};
use crate::{Error, Result};

/// Band-limited rate conversion by DFT zero-padding / truncation.
///
/// The waveform is treated as one period of a periodic signal. The output
/// length is `round(len * new_rate / old_rate)` and the output is labeled
/// with `new_rate`. Content above the smaller Nyquist frequency is dropped;
/// an even-length Nyquist bin is split (upsampling) or folded (downsampling)
/// so that an up-then-down round trip is exact.
pub fn resample(w: &ComplexWaveform, new_rate: f64) -> Result<ComplexWaveform> {
    if !(new_rate.is_finite() && new_rate > 0.0) {
        return Err(Error::param("new_rate", format!("{new_rate} is not > 0")));
    }
    let n = w.len();
    let m = (n as f64 * new_rate / w.sample_rate()).round() as usize;
    if m == n {
        return ComplexWaveform::new(w.samples().to_vec(), new_rate);
    }
    if n == 0 || m == 0 {
        return ComplexWaveform::new(Vec::new(), new_rate);
    }
    let mut spec = w.samples().to_vec();
    fft_in_place(&mut spec);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    let k = n.min(m);
    // bins strictly below the shared Nyquist frequency
    let half = k.div_ceil(2);
    out[..half].copy_from_slice(&spec[..half]);
    for i in 1..half {
        out[m - i] = spec[n - i];
    }
    if k % 2 == 0 {
        let h = k / 2;
        if m > n {
            let v = spec[h] * 0.5;
            out[h] = v;
            out[m - h] = v;
        } else {
            out[h] = spec[h] + spec[n - h];
        }
    }
    let scale = m as f64 / n as f64;
    for v in &mut out {
        *v *= scale;
    }
    ifft_in_place(&mut out);
    ComplexWaveform::new(out, new_rate)
}
