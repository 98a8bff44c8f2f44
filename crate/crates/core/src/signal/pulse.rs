use std::f64::consts::PI;

use num_complex::Complex64;

use super::ComplexWaveform;
use crate::fft::circular_filter_centered;
use crate::{Error, Result};

/// Unit-energy root-raised-cosine taps, `span * sps + 1` long, symmetric
/// about the center tap.
pub fn rrc_taps(beta: f64, sps: usize, span: usize) -> Vec<f64> {
    let half = (span * sps / 2) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|i| rrc_point(i as f64 / sps as f64, beta))
        .collect();
    let norm = taps.iter().map(|t| t * t).sum::<f64>().sqrt();
    for t in &mut taps {
        *t /= norm;
    }
    taps
}

/// RRC impulse response at `t` symbol periods (unnormalized).
fn rrc_point(t: f64, beta: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && (t.abs() - 1.0 / (4.0 * beta)).abs() < 1e-12 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let den = PI * t * (1.0 - (4.0 * beta * t).powi(2));
    num / den
}

/// Root-raised-cosine pulse shaper / matched filter.
#[derive(Debug, Clone, PartialEq)]
pub struct RrcFilter {
    beta: f64,
    sps: usize,
    span: usize,
    taps: Vec<f64>,
}

impl RrcFilter {
    pub fn new(beta: f64, sps: usize, span: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::param("beta", format!("{beta} not in [0, 1]")));
        }
        if sps < 2 {
            return Err(Error::param("sps", format!("{sps} < 2")));
        }
        if span < 8 || span % 2 != 0 {
            return Err(Error::param(
                "span",
                format!("{span} must be even and >= 8"),
            ));
        }
        Ok(RrcFilter {
            beta,
            sps,
            span,
            taps: rrc_taps(beta, sps, span),
        })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sps(&self) -> usize {
        self.sps
    }

    pub fn span(&self) -> usize {
        self.span
    }

    /// Group delay of [`RrcFilter::shape`] in samples: symbol `k` peaks at
    /// output index `k * sps + delay()`.
    pub fn delay(&self) -> usize {
        self.span * self.sps / 2
    }

    /// Upsample and convolve (full linear convolution). The output holds
    /// `(n - 1) * sps + taps` samples for `n > 0` symbols, empty otherwise.
    pub fn shape(&self, symbols: &[Complex64], symbol_rate: f64) -> Result<ComplexWaveform> {
        let rate = symbol_rate * self.sps as f64;
        if symbols.is_empty() {
            return ComplexWaveform::new(Vec::new(), rate);
        }
        let len = (symbols.len() - 1) * self.sps + self.taps.len();
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (k, &s) in symbols.iter().enumerate() {
            let base = k * self.sps;
            for (j, &t) in self.taps.iter().enumerate() {
                out[base + j] += s * t;
            }
        }
        ComplexWaveform::new(out, rate)
    }

    /// Periodic shaping: the symbol block is treated as one period, so the
    /// output has `n * sps` samples and symbol `k` peaks at index `k * sps`.
    pub fn shape_periodic(
        &self,
        symbols: &[Complex64],
        symbol_rate: f64,
    ) -> Result<ComplexWaveform> {
        let mut up = vec![Complex64::new(0.0, 0.0); symbols.len() * self.sps];
        for (k, &s) in symbols.iter().enumerate() {
            up[k * self.sps] = s;
        }
        ComplexWaveform::new(
            circular_filter_centered(&up, &self.taps),
            symbol_rate * self.sps as f64,
        )
    }

    /// Zero-phase circular matched filtering at the filter's own rate.
    pub fn filter_periodic(&self, w: &ComplexWaveform) -> Result<ComplexWaveform> {
        w.with_samples(circular_filter_centered(w.samples(), &self.taps))
    }
}

/// Shapes `symbols` with a unit-energy RRC pulse. See [`RrcFilter::shape`]
/// for the output length and delay convention.
pub fn rrc_shape(
    symbols: &[Complex64],
    beta: f64,
    sps: usize,
    span: usize,
    symbol_rate: f64,
) -> Result<ComplexWaveform> {
    RrcFilter::new(beta, sps, span)?.shape(symbols, symbol_rate)
}
