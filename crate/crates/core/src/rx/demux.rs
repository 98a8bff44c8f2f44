use num_complex::Complex64;

use crate::fft::{fft_in_place, ifft_in_place, signed_bin, wrap_bin};
use crate::signal::ComplexWaveform;
use crate::tx::SubcarrierPlan;
use crate::{Error, Result};

/// Splits a multiplexed waveform into one baseband stream per subcarrier.
///
/// Each subcarrier is moved to DC, brick-wall low-passed to
/// `(1 + beta) / 2` times its baud and resampled to `sps_out` samples per
/// symbol, all in one pass over the composite spectrum.
pub fn subcarrier_demux(
    w: &ComplexWaveform,
    plan: &SubcarrierPlan,
    sps_out: usize,
) -> Result<Vec<ComplexWaveform>> {
    let n = w.len();
    let fs = w.sample_rate();
    if plan.occupied_bandwidth() > fs * (1.0 + 1e-9) {
        return Err(Error::SampleRateMismatch {
            left: fs,
            right: plan.occupied_bandwidth(),
        });
    }
    if sps_out < 2 {
        return Err(Error::param(
            "sps_out",
            "need at least 2 samples per symbol",
        ));
    }
    let n_sym = plan.symbols_in(n, fs).ok_or_else(|| {
        Error::Config(format!(
            "{n} samples at {fs:.4e} Sa/s do not hold a whole number of {:.4e} Bd symbols",
            plan.sc_baud()
        ))
    })?;
    let out_len = n_sym * sps_out;
    let out_rate = plan.sc_baud() * sps_out as f64;
    let cutoff = (1.0 + plan.beta()) / 2.0 * plan.sc_baud();
    let mut spec = w.samples().to_vec();
    fft_in_place(&mut spec);
    let gain = out_len as f64 / n as f64;
    (0..plan.n_sc())
        .map(|sc| {
            let center = plan.center_bin(sc, n, fs);
            let mut local = vec![Complex64::new(0.0, 0.0); out_len];
            for (k, v) in local.iter_mut().enumerate() {
                let signed = signed_bin(k, out_len);
                let f = signed as f64 * out_rate / out_len as f64;
                if f.abs() <= cutoff * (1.0 + 1e-9) && signed.unsigned_abs() < n / 2 {
                    *v = spec[wrap_bin(signed + center, n)] * gain;
                }
            }
            ifft_in_place(&mut local);
            ComplexWaveform::new(local, out_rate)
        })
        .collect()
}
