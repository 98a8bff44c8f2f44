use num_complex::Complex64;

use crate::channel::Dispersion;
use crate::fft::{bin_frequency, fft_in_place, ifft_in_place, wrap_bin};
use crate::signal::ComplexWaveform;
use crate::{Error, Result};

/// Overlap-save dispersion compensation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdcConfig {
    pub fft_size: usize,
    /// Samples discarded at each block edge.
    pub overlap: usize,
    pub dispersion: Dispersion,
}

impl CdcConfig {
    pub fn new(fft_size: usize, overlap: usize, dispersion: Dispersion) -> Result<Self> {
        let cfg = CdcConfig {
            fft_size,
            overlap,
            dispersion,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overlap set to the dispersive spread across the full band at
    /// `sample_rate`, rounded up.
    pub fn for_channel(fft_size: usize, dispersion: Dispersion, sample_rate: f64) -> Result<Self> {
        Self::new(
            fft_size,
            default_overlap(&dispersion, sample_rate),
            dispersion,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 {
            return Err(Error::param(
                "fft_size",
                format!("{} is not a power of two", self.fft_size),
            ));
        }
        if self.fft_size <= 2 * self.overlap {
            return Err(Error::Config(format!(
                "fft size {} must exceed twice the overlap {}",
                self.fft_size, self.overlap
            )));
        }
        Ok(())
    }

    /// Output samples produced per block.
    pub fn block_advance(&self) -> usize {
        self.fft_size - 2 * self.overlap
    }
}

pub fn default_overlap(dispersion: &Dispersion, sample_rate: f64) -> usize {
    dispersion.spread_samples(sample_rate).ceil() as usize
}

/// Frequency-domain dispersion compensation by overlap-save on the periodic
/// waveform. Each block of `fft_size` samples is multiplied in frequency by
/// the conjugate dispersion phase and the `overlap` samples at both edges are
/// dropped.
pub fn fd_cdc(w: &ComplexWaveform, cfg: &CdcConfig) -> Result<ComplexWaveform> {
    cfg.validate()?;
    let len = w.len();
    if len == 0 || cfg.dispersion.fiber_km == 0.0 {
        return Ok(w.clone());
    }
    let n = cfg.fft_size;
    let coef = cfg.dispersion.phase_coefficient();
    let h: Vec<Complex64> = (0..n)
        .map(|k| {
            let f = bin_frequency(k, n, w.sample_rate());
            Complex64::from_polar(1.0, -coef * f * f)
        })
        .collect();
    let step = cfg.block_advance();
    let x = w.samples();
    let mut out = Vec::with_capacity(len);
    let mut block = vec![Complex64::new(0.0, 0.0); n];
    let mut start = 0usize;
    while out.len() < len {
        for (i, b) in block.iter_mut().enumerate() {
            *b = x[wrap_bin(start as isize + i as isize - cfg.overlap as isize, len)];
        }
        fft_in_place(&mut block);
        for (b, hk) in block.iter_mut().zip(&h) {
            *b *= hk;
        }
        ifft_in_place(&mut block);
        let keep = step.min(len - out.len());
        out.extend_from_slice(&block[cfg.overlap..cfg.overlap + keep]);
        start += step;
    }
    w.with_samples(out)
}
