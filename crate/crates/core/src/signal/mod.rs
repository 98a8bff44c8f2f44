//! Signal types and the shared building blocks every stage uses.

mod constellation;
mod pulse;
mod resample;

pub use constellation::{qam_demap, qam_map, Constellation};
pub use pulse::{rrc_shape, rrc_taps, RrcFilter};
pub use resample::resample;

use num_complex::Complex64;

use crate::{Error, Result};

/// Uniformly sampled complex baseband signal.
///
/// Samples are always finite; construction rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl ComplexWaveform {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::param(
                "sample_rate",
                format!("{sample_rate} is not > 0"),
            ));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFinite(i));
        }
        Ok(ComplexWaveform {
            samples,
            sample_rate,
        })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Σ|s|².
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Mean |s|², zero for an empty waveform.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            self.energy() / self.samples.len() as f64
        }
    }

    /// Replaces the samples, keeping the rate. Validates finiteness.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        Self::new(samples, self.sample_rate)
    }

    pub fn scaled(&self, gain: f64) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|s| s * gain).collect())
    }

    /// Rotates left by `shift` samples (circular): output[0] = input[shift].
    pub fn rotated_left(&self, shift: usize) -> Self {
        let mut samples = self.samples.clone();
        if !samples.is_empty() {
            let n = samples.len();
            samples.rotate_left(shift % n);
        }
        ComplexWaveform {
            samples,
            sample_rate: self.sample_rate,
        }
    }
}

/// A Jones-vector field: the X and Y polarization tributaries.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPolWaveform {
    x: ComplexWaveform,
    y: ComplexWaveform,
}

impl DualPolWaveform {
    pub fn new(x: ComplexWaveform, y: ComplexWaveform) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.sample_rate() != y.sample_rate() {
            return Err(Error::SampleRateMismatch {
                left: x.sample_rate(),
                right: y.sample_rate(),
            });
        }
        Ok(DualPolWaveform { x, y })
    }

    pub fn x(&self) -> &ComplexWaveform {
        &self.x
    }

    pub fn y(&self) -> &ComplexWaveform {
        &self.y
    }

    pub fn into_parts(self) -> (ComplexWaveform, ComplexWaveform) {
        (self.x, self.y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.x.sample_rate()
    }

    /// Combined mean power of both polarizations.
    pub fn mean_power(&self) -> f64 {
        self.x.mean_power() + self.y.mean_power()
    }
}
