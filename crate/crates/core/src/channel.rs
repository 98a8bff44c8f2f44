//! Linear dual-polarization link between transmitter and receiver.
//!
//! The signal path sees chromatic dispersion and ASE loading to a target
//! OSNR. The remotely delivered LO path sees a random polarization rotation
//! and the Wiener phase noise caused by mismatched fiber lengths.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::fft::{bin_frequency, fft_in_place, ifft_in_place};
use crate::frontend::LoState;
use crate::signal::{ComplexWaveform, DualPolWaveform};
use crate::{Error, Result, OSNR_REF_BANDWIDTH_HZ, SPEED_OF_LIGHT};

/// Fiber chromatic dispersion parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub fiber_km: f64,
    pub d_ps_nm_km: f64,
    pub wavelength_nm: f64,
}

impl Dispersion {
    pub fn new(fiber_km: f64, d_ps_nm_km: f64, wavelength_nm: f64) -> Self {
        Dispersion {
            fiber_km,
            d_ps_nm_km,
            wavelength_nm,
        }
    }

    /// Standard single-mode fiber at 1550 nm.
    pub fn smf(fiber_km: f64) -> Self {
        Self::new(fiber_km, 17.0, 1550.0)
    }

    /// `pi * D * lambda^2 * L / c` in s², the coefficient of `f^2` in the
    /// dispersion phase.
    pub fn phase_coefficient(&self) -> f64 {
        PI * self.accumulated()
    }

    /// `D * lambda^2 * L / c` (s²): group-delay slope versus frequency.
    fn accumulated(&self) -> f64 {
        let d = self.d_ps_nm_km * 1e-6; // s/m^2
        let lambda = self.wavelength_nm * 1e-9;
        let length = self.fiber_km * 1e3;
        d * lambda * lambda * length / SPEED_OF_LIGHT
    }

    /// Group-delay spread (s) across `bandwidth_hz`.
    pub fn delay_spread(&self, bandwidth_hz: f64) -> f64 {
        self.accumulated().abs() * bandwidth_hz
    }

    /// Delay spread across the full band of a signal sampled at
    /// `sample_rate`, in samples.
    pub fn spread_samples(&self, sample_rate: f64) -> f64 {
        self.delay_spread(sample_rate) * sample_rate
    }

    pub fn reversed(&self) -> Self {
        Dispersion {
            fiber_km: -self.fiber_km,
            ..*self
        }
    }
}

/// All-pass dispersion: multiplies the spectrum by `exp(+j*pi*D*lambda^2*f^2*L/c)`.
pub fn apply_cd(w: &ComplexWaveform, cd: &Dispersion) -> Result<ComplexWaveform> {
    if cd.fiber_km == 0.0 || w.is_empty() {
        return Ok(w.clone());
    }
    let n = w.len();
    let coef = cd.phase_coefficient();
    let mut buf = w.samples().to_vec();
    fft_in_place(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = bin_frequency(k, n, w.sample_rate());
        *v *= Complex64::from_polar(1.0, coef * f * f);
    }
    ifft_in_place(&mut buf);
    w.with_samples(buf)
}

/// 2x2 complex Jones matrix `[[h_xx, h_xy], [h_yx, h_yy]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl JonesMatrix {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        JonesMatrix {
            m: [[one, zero], [zero, one]],
        }
    }

    pub fn mul(&self, other: &JonesMatrix) -> JonesMatrix {
        let a = &self.m;
        let b = &other.m;
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        JonesMatrix { m }
    }

    pub fn adjoint(&self) -> JonesMatrix {
        let a = &self.m;
        JonesMatrix {
            m: [
                [a[0][0].conj(), a[1][0].conj()],
                [a[0][1].conj(), a[1][1].conj()],
            ],
        }
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Largest entry of `|H * H^† - I|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.mul(&self.adjoint());
        let id = JonesMatrix::identity();
        p.m.iter()
            .flatten()
            .zip(id.m.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply_vector(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn apply(&self, sig: &DualPolWaveform) -> Result<DualPolWaveform> {
        let (x, y): (Vec<_>, Vec<_>) = sig
            .x()
            .samples()
            .iter()
            .zip(sig.y().samples())
            .map(|(&a, &b)| {
                let [u, v] = self.apply_vector([a, b]);
                (u, v)
            })
            .unzip();
        DualPolWaveform::new(sig.x().with_samples(x)?, sig.y().with_samples(y)?)
    }
}

/// Unitary rotation `[[cos a, sin a e^{je}], [-sin a e^{-je}, cos a]]` with
/// `a` the azimuth and `e` the elevation. Sweeping both over [-90°, 90°]
/// reaches every output polarization state from a fixed input.
pub fn rotation_matrix(azimuth_deg: f64, elevation_deg: f64) -> JonesMatrix {
    let a = azimuth_deg.to_radians();
    let e = elevation_deg.to_radians();
    let (s, c) = a.sin_cos();
    JonesMatrix {
        m: [
            [Complex64::new(c, 0.0), Complex64::from_polar(s, e)],
            [-Complex64::from_polar(s, -e), Complex64::new(c, 0.0)],
        ],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub fiber_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub wavelength_nm: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Effective linewidth of the LO-path phase noise.
    pub linewidth_hz: f64,
    /// Target OSNR in the 12.5 GHz reference bandwidth; `None` disables ASE.
    pub osnr_db: Option<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            fiber_km: 0.0,
            dispersion_ps_nm_km: 17.0,
            wavelength_nm: 1550.0,
            azimuth_deg: 0.0,
            elevation_deg: 0.0,
            linewidth_hz: 0.0,
            osnr_db: None,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fiber_km >= 0.0 && self.fiber_km.is_finite()) {
            return Err(Error::param("fiber_km", "must be >= 0"));
        }
        if !(self.linewidth_hz >= 0.0 && self.linewidth_hz.is_finite()) {
            return Err(Error::param("linewidth_hz", "must be >= 0"));
        }
        for (name, v) in [
            ("azimuth_deg", self.azimuth_deg),
            ("elevation_deg", self.elevation_deg),
        ] {
            if !(-90.0..=90.0).contains(&v) {
                return Err(Error::param(name, format!("{v} not in [-90, 90]")));
            }
        }
        if !(self.wavelength_nm > 0.0 && self.dispersion_ps_nm_km.is_finite()) {
            return Err(Error::param("wavelength_nm", "must be > 0"));
        }
        if let Some(o) = self.osnr_db {
            if !o.is_finite() {
                return Err(Error::param("osnr_db", "must be finite or off"));
            }
        }
        Ok(())
    }

    pub fn dispersion(&self) -> Dispersion {
        Dispersion::new(self.fiber_km, self.dispersion_ps_nm_km, self.wavelength_nm)
    }

    pub fn rotation(&self) -> JonesMatrix {
        rotation_matrix(self.azimuth_deg, self.elevation_deg)
    }
}

/// Wiener phase: `theta[0] = 0`, `theta[n+1] = theta[n] + g * sqrt(2*pi*linewidth/fs)`.
pub fn wiener_phase(
    len: usize,
    linewidth_hz: f64,
    sample_rate: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let step = (2.0 * PI * linewidth_hz / sample_rate).sqrt();
    let mut theta = Vec::with_capacity(len);
    let mut acc = 0.0;
    for _ in 0..len {
        theta.push(acc);
        if step > 0.0 {
            let g: f64 = StandardNormal.sample(rng);
            acc += g * step;
        }
    }
    theta
}

/// Adds white complex Gaussian noise to both polarizations so that the
/// total signal power over the noise power in 12.5 GHz (both polarizations)
/// equals `osnr_db`.
pub fn load_osnr(
    sig: &DualPolWaveform,
    osnr_db: f64,
    rng: &mut ChaCha8Rng,
) -> Result<DualPolWaveform> {
    let fs = sig.sample_rate();
    let p_sig = sig.mean_power();
    let osnr = 10f64.powf(osnr_db / 10.0);
    // per-polarization complex noise variance over the full simulation band
    let var = p_sig * fs / (2.0 * OSNR_REF_BANDWIDTH_HZ * osnr);
    let x = add_awgn(sig.x().samples(), var, rng);
    let y = add_awgn(sig.y().samples(), var, rng);
    DualPolWaveform::new(sig.x().with_samples(x)?, sig.y().with_samples(y)?)
}

pub(crate) fn add_awgn(x: &[Complex64], variance: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let sigma = (variance / 2.0).sqrt();
    x.iter()
        .map(|&s| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            s + Complex64::new(re, im) * sigma
        })
        .collect()
}

/// Propagates the signal and the LO carrier through the link.
///
/// Signal: dispersion, then ASE loading. LO: polarization rotation (its Jones
/// state becomes `R * [1, 0]`) and Wiener phase noise added to the carrier
/// phase.
pub fn apply_channel(
    sig: &DualPolWaveform,
    lo_carrier: &ComplexWaveform,
    cfg: &ChannelConfig,
    rng_seed: u64,
) -> Result<(DualPolWaveform, LoState)> {
    cfg.validate()?;
    if sig.sample_rate() != lo_carrier.sample_rate() {
        return Err(Error::SampleRateMismatch {
            left: sig.sample_rate(),
            right: lo_carrier.sample_rate(),
        });
    }
    if sig.len() != lo_carrier.len() {
        return Err(Error::LengthMismatch {
            left: sig.len(),
            right: lo_carrier.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let cd = cfg.dispersion();
    let mut out = DualPolWaveform::new(apply_cd(sig.x(), &cd)?, apply_cd(sig.y(), &cd)?)?;
    if let Some(osnr) = cfg.osnr_db {
        out = load_osnr(&out, osnr, &mut rng)?;
    }

    let theta = wiener_phase(
        lo_carrier.len(),
        cfg.linewidth_hz,
        lo_carrier.sample_rate(),
        &mut rng,
    );
    let phase = lo_carrier
        .samples()
        .iter()
        .zip(&theta)
        .map(|(c, t)| c.arg() + t)
        .collect();
    let jones = cfg
        .rotation()
        .apply_vector([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let lo_power = lo_carrier.mean_power();
    let power_ratio_db = if lo_power > 0.0 && out.mean_power() > 0.0 {
        10.0 * (lo_power / out.mean_power()).log10()
    } else {
        f64::INFINITY
    };
    let lo = LoState::new(jones, phase, power_ratio_db)?;
    Ok((out, lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise_wave(n: usize, seed: u64) -> ComplexWaveform {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeros = vec![Complex64::new(0.0, 0.0); n];
        ComplexWaveform::new(add_awgn(&zeros, 1.0, &mut rng), 100e9).unwrap()
    }

    #[test]
    fn zero_length_fiber_is_identity() {
        let w = noise_wave(256, 1);
        assert_eq!(apply_cd(&w, &Dispersion::smf(0.0)).unwrap(), w);
    }

    #[test]
    fn cd_is_all_pass_and_invertible() {
        let w = noise_wave(4096, 2);
        let cd = Dispersion::smf(80.0);
        let out = apply_cd(&w, &cd).unwrap();
        assert!(((out.energy() - w.energy()) / w.energy()).abs() < 1e-10);
        let back = apply_cd(&out, &cd.reversed()).unwrap();
        let err: f64 = back
            .samples()
            .iter()
            .zip(w.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
        assert!((err / w.energy()).sqrt() < 1e-9);
    }

    #[test]
    fn delay_spread_80km() {
        // D*L*(lambda^2/c)*df for 55 GHz: about 0.6 ns, ~30 symbols at 50 GBd
        let spread = Dispersion::smf(80.0).delay_spread(55e9);
        assert!((spread - 0.599e-9).abs() < 0.01e-9, "{spread}");
        assert!((spread * 50e9 - 30.0).abs() < 0.5);
    }

    #[test]
    fn rotation_special_cases() {
        let id = rotation_matrix(0.0, 0.0);
        assert_eq!(id, JonesMatrix::identity());
        let swap = rotation_matrix(90.0, 0.0);
        assert!(swap.m[0][0].norm() < 1e-15 && swap.m[1][1].norm() < 1e-15);
        assert!((swap.m[0][1].norm() - 1.0).abs() < 1e-15);
        assert!((swap.m[1][0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_increment_statistics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let theta = wiener_phase(1 << 20, 100e3, 100e9, &mut rng);
        let inc: Vec<f64> = theta.windows(2).map(|w| w[1] - w[0]).collect();
        let n = inc.len() as f64;
        let mean = inc.iter().sum::<f64>() / n;
        let var = inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
        let expected = (2.0 * PI * 1e5 / 1e11).sqrt();
        assert!((expected - 2.5066e-3).abs() < 1e-6);
        assert!((var.sqrt() / expected - 1.0).abs() < 0.01);
        for lag in 1..=5 {
            let r = inc
                .windows(lag + 1)
                .map(|w| (w[0] - mean) * (w[lag] - mean))
                .sum::<f64>()
                / (n * var);
            assert!(r.abs() < 0.02, "lag {lag}: {r}");
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = ChannelConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.azimuth_deg = 91.0;
        assert!(cfg.validate().is_err());
        cfg.azimuth_deg = 0.0;
        cfg.fiber_km = -1.0;
        assert!(cfg.validate().is_err());
        cfg.fiber_km = 0.0;
        cfg.linewidth_hz = -1.0;
        assert!(cfg.validate().is_err());
    }
}
