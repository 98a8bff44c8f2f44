//! Polarization-insensitive receiver front-end: 3 dB coupler, one 90° hybrid
//! and two balanced photodiodes. Balanced detection keeps only the
//! signal-LO beat, i.e. the projection of the field onto the LO's Jones
//! state.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::add_awgn;
use crate::signal::{ComplexWaveform, DualPolWaveform};
use crate::{Error, Result};

/// LO field at the hybrid: polarization, per-sample phase and power ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct LoState {
    jones: [Complex64; 2],
    phase: Vec<f64>,
    power_ratio_db: f64,
}

impl LoState {
    pub fn new(jones: [Complex64; 2], phase: Vec<f64>, power_ratio_db: f64) -> Result<Self> {
        let norm = (jones[0].norm_sqr() + jones[1].norm_sqr()).sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::param("jones", format!("norm {norm} is not 1")));
        }
        if phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("phase", "non-finite phase sample"));
        }
        Ok(LoState {
            jones,
            phase,
            power_ratio_db,
        })
    }

    /// X-polarized LO with zero phase for `len` samples.
    pub fn aligned(len: usize) -> Self {
        LoState {
            jones: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            phase: vec![0.0; len],
            power_ratio_db: f64::INFINITY,
        }
    }

    pub fn jones(&self) -> [Complex64; 2] {
        self.jones
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn power_ratio_db(&self) -> f64 {
        self.power_ratio_db
    }

    pub fn with_jones(&self, jones: [Complex64; 2]) -> Result<Self> {
        Self::new(jones, self.phase.clone(), self.power_ratio_db)
    }
}

/// `out[n] = (conj(u_x) x[n] + conj(u_y) y[n]) * exp(j theta[n])`.
pub fn coherent_detect(sig: &DualPolWaveform, lo: &LoState) -> Result<ComplexWaveform> {
    if lo.phase.len() != sig.len() {
        return Err(Error::LengthMismatch {
            left: sig.len(),
            right: lo.phase.len(),
        });
    }
    let ux = lo.jones[0].conj();
    let uy = lo.jones[1].conj();
    let out = sig
        .x()
        .samples()
        .iter()
        .zip(sig.y().samples())
        .zip(&lo.phase)
        .map(|((&x, &y), &theta)| (ux * x + uy * y) * Complex64::from_polar(1.0, theta))
        .collect();
    sig.x().with_samples(out)
}

/// Electrical noise at the given SNR relative to the waveform's mean power.
/// `None` is the identity.
pub fn add_receiver_noise(
    w: &ComplexWaveform,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<ComplexWaveform> {
    let Some(snr_db) = snr_db else {
        return Ok(w.clone());
    };
    let var = w.mean_power() / 10f64.powf(snr_db / 10.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    w.with_samples(add_awgn(w.samples(), var, &mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn dual(n: usize) -> DualPolWaveform {
        let x = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let y = (0..n)
            .map(|i| Complex64::new(-1.0, i as f64 * 0.5))
            .collect();
        DualPolWaveform::new(
            ComplexWaveform::new(x, 1.0).unwrap(),
            ComplexWaveform::new(y, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn aligned_lo_returns_x() {
        let s = dual(8);
        let out = coherent_detect(&s, &LoState::aligned(8)).unwrap();
        assert_eq!(out.samples(), s.x().samples());
    }

    #[test]
    fn orthogonal_lo_fades_x_only_signal() {
        let s = dual(8);
        let x_only =
            DualPolWaveform::new(s.x().clone(), ComplexWaveform::zeros(8, 1.0).unwrap()).unwrap();
        let lo = LoState::aligned(8)
            .with_jones([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])
            .unwrap();
        let out = coherent_detect(&x_only, &lo).unwrap();
        assert!(out.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn diagonal_lo_mixes_evenly() {
        let s = dual(8);
        let lo = LoState::aligned(8)
            .with_jones([
                Complex64::new(FRAC_1_SQRT_2, 0.0),
                Complex64::new(FRAC_1_SQRT_2, 0.0),
            ])
            .unwrap();
        let out = coherent_detect(&s, &lo).unwrap();
        for ((o, x), y) in out
            .samples()
            .iter()
            .zip(s.x().samples())
            .zip(s.y().samples())
        {
            assert!((o - (x + y) * FRAC_1_SQRT_2).norm() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(coherent_detect(&dual(8), &LoState::aligned(7)).is_err());
        assert!(LoState::new(
            [Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)],
            vec![],
            0.0
        )
        .is_err());
    }

    #[test]
    fn receiver_noise_power() {
        let n = 1 << 16;
        let w = ComplexWaveform::new(vec![Complex64::new(1.0, 0.0); n], 1.0).unwrap();
        assert_eq!(add_receiver_noise(&w, None, 1).unwrap(), w);
        let noisy = add_receiver_noise(&w, Some(20.0), 1).unwrap();
        let p_noise = noisy
            .samples()
            .iter()
            .map(|s| (s - Complex64::new(1.0, 0.0)).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((p_noise / 0.01 - 1.0).abs() < 0.05, "{p_noise}");
        let zero_db = add_receiver_noise(&w, Some(0.0), 2).unwrap();
        assert!((zero_db.mean_power() / 2.0 - 1.0).abs() < 0.05);
    }
}
