//! BER counting, Q², EVM, OSNR estimation and theoretical QAM references.

use num_complex::Complex64;
use statrs::function::erf::{erfc, erfc_inv};

use crate::signal::{Constellation, DualPolWaveform};
use crate::{Error, Result, OSNR_REF_BANDWIDTH_HZ};

/// BER at which hard-decision FEC still delivers error-free output.
pub const HD_FEC_THRESHOLD: f64 = 3.8e-3;

/// Below this many errors a BER estimate is flagged as low-confidence.
pub const LOW_CONFIDENCE_ERRORS: u64 = 100;

/// EVM floor reported for an error-free comparison.
pub const EVM_FLOOR_DB: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerCount {
    pub bits_compared: u64,
    pub bit_errors: u64,
    pub ber: f64,
}

impl BerCount {
    pub fn new(bits_compared: u64, bit_errors: u64) -> Result<Self> {
        if bits_compared == 0 {
            return Err(Error::Degenerate("no bits compared"));
        }
        if bit_errors > bits_compared {
            return Err(Error::param("bit_errors", "exceeds bits compared"));
        }
        Ok(BerCount {
            bits_compared,
            bit_errors,
            ber: bit_errors as f64 / bits_compared as f64,
        })
    }

    pub fn low_confidence(&self) -> bool {
        self.bit_errors < LOW_CONFIDENCE_ERRORS
    }
}

/// Aggregate BER with the per-subcarrier breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub total: BerCount,
    pub per_subcarrier: Vec<BerCount>,
}

impl BerReport {
    pub fn from_subcarriers(per_subcarrier: Vec<BerCount>) -> Result<Self> {
        let bits = per_subcarrier.iter().map(|c| c.bits_compared).sum();
        let errors = per_subcarrier.iter().map(|c| c.bit_errors).sum();
        Ok(BerReport {
            total: BerCount::new(bits, errors)?,
            per_subcarrier,
        })
    }

    pub fn ber(&self) -> f64 {
        self.total.ber
    }

    pub fn low_confidence(&self) -> bool {
        self.total.low_confidence()
    }
}

/// Exact Hamming comparison of two bit sequences.
pub fn count_ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<BerCount> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::LengthMismatch {
            left: tx_bits.len(),
            right: rx_bits.len(),
        });
    }
    let errors = tx_bits
        .iter()
        .zip(rx_bits)
        .filter(|(a, b)| (*a & 1) != (*b & 1))
        .count();
    BerCount::new(tx_bits.len() as u64, errors as u64)
}

/// Theoretical BER of the library's Gray-labeled M-QAM over AWGN at the given
/// symbol SNR (Es/N0).
///
/// Decision regions are taken as the axis-aligned rectangles bounded by the
/// midpoints to each axis neighbor, which is exact maximum-likelihood for the
/// square orders. For the 32-point cross the rectangles of the two points
/// bordering each missing corner overlap in that corner; its probability is
/// split evenly between them. The result sums label distances weighted by
/// region probabilities, so it is exact for M = 4, 16, 64 and a tight
/// approximation for M = 32.
pub fn theory_ber_qam(order: usize, snr_per_symbol_db: f64) -> Result<f64> {
    let c = Constellation::qam(order)?;
    let snr = 10f64.powf(snr_per_symbol_db / 10.0);
    let sigma = (1.0 / (2.0 * snr)).sqrt();
    let regions = decision_rectangles(&c);
    let overlaps = rectangle_overlaps(&regions);
    let bits = c.bits_per_symbol() as f64;
    let mut total = 0.0;
    for (i, &p) in c.points().iter().enumerate() {
        for (j, r) in regions.iter().enumerate() {
            if i == j {
                continue;
            }
            let hd = (c.label(i) ^ c.label(j)).count_ones() as f64;
            let mut prob = r.probability(p, sigma);
            for &(a, b, ref o) in &overlaps {
                if a == j || b == j {
                    prob -= 0.5 * o.probability(p, sigma);
                }
            }
            total += hd * prob.max(0.0);
        }
    }
    Ok((total / (order as f64 * bits)).min(0.5))
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x: (f64, f64),
    y: (f64, f64),
}

impl Rect {
    fn probability(&self, center: Complex64, sigma: f64) -> f64 {
        interval_probability(self.x, center.re, sigma)
            * interval_probability(self.y, center.im, sigma)
    }

    fn intersect(&self, o: &Rect) -> Option<Rect> {
        let x = (self.x.0.max(o.x.0), self.x.1.min(o.x.1));
        let y = (self.y.0.max(o.y.0), self.y.1.min(o.y.1));
        (x.0 < x.1 && y.0 < y.1).then_some(Rect { x, y })
    }
}

/// P(a < c + sigma*g < b) for standard normal g, computed on the tail side
/// to keep precision when the interval excludes the center.
fn interval_probability((a, b): (f64, f64), c: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    let za = (a - c) / s;
    let zb = (b - c) / s;
    if za >= 0.0 {
        0.5 * (erfc(za) - erfc(zb))
    } else if zb <= 0.0 {
        0.5 * (erfc(-zb) - erfc(-za))
    } else {
        1.0 - 0.5 * erfc(-za) - 0.5 * erfc(zb)
    }
}

fn decision_rectangles(c: &Constellation) -> Vec<Rect> {
    let pts = c.points();
    let dmin = pts
        .iter()
        .enumerate()
        .flat_map(|(i, a)| pts[i + 1..].iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min);
    let has = |q: Complex64| pts.iter().any(|p| (p - q).norm() < 1e-6 * dmin);
    pts.iter()
        .map(|&p| {
            let half = dmin / 2.0;
            let dx = Complex64::new(dmin, 0.0);
            let dy = Complex64::new(0.0, dmin);
            let lo_x = if has(p - dx) {
                p.re - half
            } else {
                f64::NEG_INFINITY
            };
            let hi_x = if has(p + dx) {
                p.re + half
            } else {
                f64::INFINITY
            };
            let lo_y = if has(p - dy) {
                p.im - half
            } else {
                f64::NEG_INFINITY
            };
            let hi_y = if has(p + dy) {
                p.im + half
            } else {
                f64::INFINITY
            };
            Rect {
                x: (lo_x, hi_x),
                y: (lo_y, hi_y),
            }
        })
        .collect()
}

fn rectangle_overlaps(regions: &[Rect]) -> Vec<(usize, usize, Rect)> {
    let mut out = Vec::new();
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if let Some(r) = regions[i].intersect(&regions[j]) {
                out.push((i, j, r));
            }
        }
    }
    out
}

/// Q² in dB from a BER: `20 log10(sqrt(2) * erfcinv(2 * ber))`.
pub fn q_factor_db(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.5) {
        return Err(Error::Domain {
            name: "ber",
            value: ber,
            domain: "(0, 0.5)",
        });
    }
    Ok(20.0 * (2f64.sqrt() * erfc_inv(2.0 * ber)).log10())
}

/// Inverse of [`q_factor_db`].
pub fn ber_from_q_db(q_db: f64) -> f64 {
    let q = 10f64.powf(q_db / 20.0);
    0.5 * erfc(q / 2f64.sqrt())
}

/// `10 log10(mean|rx - ref|^2 / mean|ref|^2)`, floored at [`EVM_FLOOR_DB`].
pub fn evm_db(rx: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if rx.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: rx.len(),
            right: reference.len(),
        });
    }
    let p_ref: f64 = reference.iter().map(|r| r.norm_sqr()).sum();
    if p_ref <= 0.0 {
        return Err(Error::Degenerate("zero reference power"));
    }
    let p_err: f64 = rx
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    if p_err <= 0.0 {
        return Ok(EVM_FLOOR_DB);
    }
    Ok((10.0 * (p_err / p_ref).log10()).max(EVM_FLOOR_DB))
}

/// Q² inferred from a data-aided EVM: the EVM is read as an effective symbol
/// SNR, converted to a BER with [`theory_ber_qam`], then to Q².
pub fn q_factor_from_evm_db(evm_db: f64, order: usize) -> Result<f64> {
    let ber = theory_ber_qam(order, -evm_db)?;
    // floor so that the inverse stays finite on near-perfect links
    q_factor_db(ber.max(1e-300))
}

/// OSNR of `noisy` given the noise-free `clean` field, both polarizations,
/// noise power rescaled to the 12.5 GHz reference bandwidth.
pub fn estimate_osnr_db(clean: &DualPolWaveform, noisy: &DualPolWaveform) -> Result<f64> {
    if clean.len() != noisy.len() {
        return Err(Error::LengthMismatch {
            left: clean.len(),
            right: noisy.len(),
        });
    }
    let n = clean.len().max(1) as f64;
    let noise: f64 = [(clean.x(), noisy.x()), (clean.y(), noisy.y())]
        .iter()
        .flat_map(|(a, b)| {
            a.samples()
                .iter()
                .zip(b.samples())
                .map(|(u, v)| (v - u).norm_sqr())
        })
        .sum::<f64>()
        / n;
    if noise <= 0.0 {
        return Err(Error::Degenerate("no noise present"));
    }
    let in_ref = noise * OSNR_REF_BANDWIDTH_HZ / clean.sample_rate();
    Ok(10.0 * (clean.mean_power() / in_ref).log10())
}

/// Symbol SNR (dB) of the decoded stream for a given OSNR:
/// `SNR = OSNR + 10 log10(12.5 GHz / symbol_rate)` with the aggregate
/// symbol rate of one polarization-equivalent stream.
pub fn snr_from_osnr_db(osnr_db: f64, symbol_rate: f64) -> f64 {
    osnr_db + 10.0 * (OSNR_REF_BANDWIDTH_HZ / symbol_rate).log10()
}

/// Inverse of [`snr_from_osnr_db`].
pub fn osnr_from_snr_db(snr_db: f64, symbol_rate: f64) -> f64 {
    snr_db - 10.0 * (OSNR_REF_BANDWIDTH_HZ / symbol_rate).log10()
}

/// Symbol SNR (dB) at which [`theory_ber_qam`] equals `target_ber`, by
/// bisection on [-10, 60] dB.
pub fn theory_required_snr_db(order: usize, target_ber: f64) -> Result<f64> {
    let (mut lo, mut hi) = (-10.0, 60.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if theory_ber_qam(order, mid)? > target_ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
