//! Complex multiplier/adder accounting for dispersion compensation.
//!
//! Overlap-save FD-CDC costs `N(1 + log2 N)` multiplications and `2N log2 N`
//! additions per block and advances `N - 2 N_OL` samples per block. Absorbing
//! the dispersion into the 2x2 equalizer instead costs four extra taps on each
//! of the four FIRs over the odd/even streams: `8M` of each.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Overlap used for a 50 GBd single carrier after 80 km of SMF.
pub const SINGLE_CARRIER_80KM_OVERLAP: usize = 106;
/// Overlap used for a 12.5 GBd subcarrier after 80 km of SMF.
pub const SUBCARRIER_80KM_OVERLAP: usize = 8;
/// Extra equalizer taps per FIR that absorb 80 km of dispersion.
pub const ABSORBED_EXTRA_TAPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    SingleCarrierFdcdc,
    DscmFdcdc,
    Proposed,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::SingleCarrierFdcdc,
        Scheme::DscmFdcdc,
        Scheme::Proposed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SingleCarrierFdcdc => "single-carrier-fdcdc",
            Scheme::DscmFdcdc => "dscm-fdcdc",
            Scheme::Proposed => "proposed",
        }
    }

    /// Overlap preset for 80 km, `None` for the equalizer-absorbed scheme.
    pub fn preset_overlap(self) -> Option<usize> {
        match self {
            Scheme::SingleCarrierFdcdc => Some(SINGLE_CARRIER_80KM_OVERLAP),
            Scheme::DscmFdcdc => Some(SUBCARRIER_80KM_OVERLAP),
            Scheme::Proposed => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityInputs {
    pub data_len: u64,
    pub fft_size: usize,
    pub overlap: usize,
    pub scheme: Scheme,
}

impl ComplexityInputs {
    pub fn evaluate(&self) -> Result<ComplexityReport> {
        match self.scheme {
            Scheme::Proposed => proposed_complexity(self.data_len),
            _ => fdcdc_complexity(self.data_len, self.fft_size, self.overlap),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityReport {
    pub multiplications: f64,
    pub additions: f64,
    pub per_symbol_mults: f64,
    pub per_symbol_adds: f64,
}

impl ComplexityReport {
    fn from_totals(m: u64, multiplications: f64, additions: f64) -> Self {
        ComplexityReport {
            multiplications,
            additions,
            per_symbol_mults: multiplications / m as f64,
            per_symbol_adds: additions / m as f64,
        }
    }
}

/// Overlap-save FD-CDC over `m` symbols with FFT size `n` and `overlap`
/// samples discarded at each block edge.
pub fn fdcdc_complexity(m: u64, n: usize, overlap: usize) -> Result<ComplexityReport> {
    if m == 0 {
        return Err(Error::param("data_len", "must be positive"));
    }
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::param(
            "fft_size",
            format!("{n} is not a power of two"),
        ));
    }
    if n <= 2 * overlap {
        return Err(Error::Config(format!(
            "fft size {n} must exceed twice the overlap {overlap}"
        )));
    }
    let nf = n as f64;
    let log_n = nf.log2();
    let blocks = m as f64 / (nf - 2.0 * overlap as f64);
    Ok(ComplexityReport::from_totals(
        m,
        blocks * nf * (1.0 + log_n),
        blocks * 2.0 * nf * log_n,
    ))
}

/// Dispersion absorbed into the equalizer: `8M` multiplications and additions.
pub fn proposed_complexity(m: u64) -> Result<ComplexityReport> {
    if m == 0 {
        return Err(Error::param("data_len", "must be positive"));
    }
    let ops = 2.0 * ABSORBED_EXTRA_TAPS as f64 * m as f64;
    Ok(ComplexityReport::from_totals(m, ops, ops))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityRow {
    pub scheme: Scheme,
    /// `None` for schemes that do not depend on the FFT size.
    pub fft_size: Option<usize>,
    pub overlap: Option<usize>,
    pub report: ComplexityReport,
}

/// Per-symbol counts for each scheme over the given FFT sizes using the
/// 80 km overlap presets. FFT sizes too small for a scheme's overlap are
/// skipped; the proposed scheme contributes a single row.
pub fn complexity_table(fft_sizes: &[usize], schemes: &[Scheme]) -> Result<Vec<ComplexityRow>> {
    complexity_table_with(fft_sizes, schemes, |s| s.preset_overlap())
}

/// As [`complexity_table`] with caller-supplied overlaps.
pub fn complexity_table_with(
    fft_sizes: &[usize],
    schemes: &[Scheme],
    overlap_for: impl Fn(Scheme) -> Option<usize>,
) -> Result<Vec<ComplexityRow>> {
    const M: u64 = 1 << 20;
    let mut rows = Vec::new();
    for &scheme in schemes {
        match overlap_for(scheme) {
            None => rows.push(ComplexityRow {
                scheme,
                fft_size: None,
                overlap: None,
                report: proposed_complexity(M)?,
            }),
            Some(ol) => {
                for &n in fft_sizes {
                    if n <= 2 * ol {
                        continue;
                    }
                    rows.push(ComplexityRow {
                        scheme,
                        fft_size: Some(n),
                        overlap: Some(ol),
                        report: fdcdc_complexity(M, n, ol)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// FFT size (power of two, up to `max_n`) minimizing per-symbol
/// multiplications for the given overlap.
pub fn optimal_fft_size(overlap: usize, max_n: usize) -> Option<(usize, f64)> {
    (1..usize::BITS)
        .map(|k| 1usize << k)
        .take_while(|&n| n <= max_n)
        .filter(|&n| n > 2 * overlap)
        .filter_map(|n| {
            fdcdc_complexity(1, n, overlap)
                .ok()
                .map(|r| (n, r.per_symbol_mults))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        let sc = fdcdc_complexity(1000, 512, 106).unwrap();
        assert!((sc.per_symbol_mults - 512.0 * 10.0 / 300.0).abs() < 1e-12);
        let d = fdcdc_complexity(1000, 64, 8).unwrap();
        assert!((d.per_symbol_mults - 64.0 * 7.0 / 48.0).abs() < 1e-12);
        assert!((d.per_symbol_adds - 16.0).abs() < 1e-12);
        let p = proposed_complexity(1).unwrap();
        assert_eq!((p.multiplications, p.additions), (8.0, 8.0));
    }

    #[test]
    fn quarter_overlap_doubles() {
        for ol in [4usize, 16, 64] {
            let n = 4 * ol;
            let r = fdcdc_complexity(7, n, ol).unwrap();
            let closed = 2.0 * (1.0 + (n as f64).log2());
            assert!((r.per_symbol_mults - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_stalled_blocks() {
        assert!(matches!(fdcdc_complexity(10, 16, 8), Err(Error::Config(_))));
        assert!(fdcdc_complexity(10, 48, 8).is_err());
        assert!(fdcdc_complexity(0, 64, 8).is_err());
        assert!(proposed_complexity(0).is_err());
    }

    #[test]
    fn table_shape() {
        let rows = complexity_table(&[256, 512, 1024, 2048], &Scheme::ALL).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(
            rows.iter().filter(|r| r.scheme == Scheme::Proposed).count(),
            1
        );
    }

    #[test]
    fn optimum_is_interior() {
        let (n, best) = optimal_fft_size(106, 1 << 16).unwrap();
        assert!(n > 256 && n < 1 << 16);
        let below = fdcdc_complexity(1, 256, 106).unwrap().per_symbol_mults;
        let above = fdcdc_complexity(1, 1 << 16, 106).unwrap().per_symbol_mults;
        assert!(best < below && best < above);
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("fdcdc".parse::<Scheme>().is_err());
    }
}
