//! Transmit-side DSP: bit source, Alamouti polarization-time encoding and
//! digital subcarrier multiplexing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fft::{fft_in_place, ifft_in_place, wrap_bin};
use crate::signal::{qam_map, ComplexWaveform, Constellation, DualPolWaveform, RrcFilter};
use crate::{Error, Result};

/// Reproducible pseudo-random bits (one per byte).
pub fn prbs(length: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(length);
    while out.len() < length {
        let word: u64 = rng.random();
        let take = (length - out.len()).min(64);
        out.extend((0..take).map(|b| ((word >> b) & 1) as u8));
    }
    out
}

/// Alamouti-coded symbol streams for the two polarizations.
///
/// For every pair `(s[2k], s[2k+1])`:
/// `ex = (s[2k], -conj(s[2k+1]))`, `ey = (s[2k+1], conj(s[2k]))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlamoutiFrame {
    pub source: Vec<Complex64>,
    pub ex: Vec<Complex64>,
    pub ey: Vec<Complex64>,
}

pub fn alamouti_encode(source: &[Complex64]) -> Result<AlamoutiFrame> {
    if source.len() % 2 != 0 {
        return Err(Error::InputLength {
            len: source.len(),
            multiple: 2,
        });
    }
    let mut ex = Vec::with_capacity(source.len());
    let mut ey = Vec::with_capacity(source.len());
    for pair in source.chunks_exact(2) {
        let (s1, s2) = (pair[0], pair[1]);
        ex.extend([s1, -s2.conj()]);
        ey.extend([s2, s1.conj()]);
    }
    Ok(AlamoutiFrame {
        source: source.to_vec(),
        ex,
        ey,
    })
}

/// Frequency layout of the digital subcarriers.
///
/// Centers are symmetric about DC and spaced by `(1 + beta)` times the
/// per-subcarrier baud, so adjacent RRC spectra touch without overlapping.
/// Index 0 (SC1) is the lowest frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierPlan {
    n_sc: usize,
    total_baud: f64,
    beta: f64,
    centers: Vec<f64>,
}

impl SubcarrierPlan {
    pub fn new(n_sc: usize, total_baud: f64, beta: f64) -> Result<Self> {
        if n_sc == 0 {
            return Err(Error::param("n_sc", "at least one subcarrier"));
        }
        if !(total_baud.is_finite() && total_baud > 0.0) {
            return Err(Error::param(
                "total_baud",
                format!("{total_baud} is not > 0"),
            ));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::param("beta", format!("{beta} not in [0, 1]")));
        }
        let spacing = (1.0 + beta) * total_baud / n_sc as f64;
        let mid = (n_sc as f64 - 1.0) / 2.0;
        let centers = (0..n_sc).map(|k| (k as f64 - mid) * spacing).collect();
        Ok(SubcarrierPlan {
            n_sc,
            total_baud,
            beta,
            centers,
        })
    }

    pub fn n_sc(&self) -> usize {
        self.n_sc
    }

    pub fn total_baud(&self) -> f64 {
        self.total_baud
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sc_baud(&self) -> f64 {
        self.total_baud / self.n_sc as f64
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Aggregate occupied bandwidth `(1 + beta) * total_baud`.
    pub fn occupied_bandwidth(&self) -> f64 {
        (1.0 + self.beta) * self.total_baud
    }

    /// Subcarrier center realized on the DFT grid of an `n`-point transform
    /// at `sample_rate` (nearest bin). Transmitter and receiver both use this
    /// so the realized centers agree exactly.
    pub fn center_bin(&self, sc: usize, n: usize, sample_rate: f64) -> isize {
        (self.centers[sc] * n as f64 / sample_rate).round() as isize
    }

    /// Net information rate (bit/s). Both polarizations carry the Alamouti
    /// pair of a single source stream, so this is half the rate of
    /// independent dual-polarization modulation at the same baud.
    pub fn net_bit_rate(&self, bits_per_symbol: usize) -> f64 {
        self.total_baud * bits_per_symbol as f64
    }

    /// Symbols per subcarrier that fit one period of `n` samples at
    /// `sample_rate`, if integral.
    pub fn symbols_in(&self, n: usize, sample_rate: f64) -> Option<usize> {
        let sym = n as f64 * self.sc_baud() / sample_rate;
        let rounded = sym.round();
        ((sym - rounded).abs() < 1e-6 && rounded >= 1.0).then_some(rounded as usize)
    }
}

/// What each polarization carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TxMode {
    /// Alamouti pair of one source stream on X and Y.
    #[default]
    Alamouti,
    /// Plain symbols on X only, Y dark. Baseline that shows polarization fading.
    SinglePol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxParams {
    pub plan: SubcarrierPlan,
    /// Output samples per symbol of the aggregate baud.
    pub sps_out: usize,
    pub rrc_span: usize,
    /// Known symbols prepended to every subcarrier for synchronization.
    pub preamble_len: usize,
    pub mode: TxMode,
}

impl TxParams {
    pub fn new(plan: SubcarrierPlan) -> Self {
        TxParams {
            plan,
            sps_out: 2,
            rrc_span: 64,
            preamble_len: 512,
            mode: TxMode::Alamouti,
        }
    }

    pub fn output_rate(&self) -> f64 {
        self.sps_out as f64 * self.plan.total_baud()
    }
}

/// Seed of the fixed preamble of subcarrier `sc`.
pub fn preamble_seed(sc: usize) -> u64 {
    0x5EED_0000 + sc as u64
}

/// Per-subcarrier reference kept for the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierTx {
    /// Preamble followed by payload symbols.
    pub frame: AlamoutiFrame,
    /// Payload bits mapped after the preamble.
    pub payload_bits: Vec<u8>,
    pub preamble_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TxOutput {
    pub waveform: DualPolWaveform,
    pub subcarriers: Vec<SubcarrierTx>,
    pub mode: TxMode,
}

/// Builds the multiplexed dual-polarization transmit waveform.
///
/// Bits are split evenly across subcarriers. Each subcarrier is mapped,
/// preceded by its preamble, Alamouti-encoded, RRC-shaped and moved to its
/// center frequency; the subcarriers are summed per polarization and each
/// polarization is scaled to unit mean power. The signal is periodic with one
/// period equal to the frame, and the output rate is
/// `sps_out * total_baud`.
pub fn build_dscm_tx(bits: &[u8], c: &Constellation, params: &TxParams) -> Result<TxOutput> {
    let plan = &params.plan;
    let n_sc = plan.n_sc();
    let fs = params.output_rate();
    if plan.occupied_bandwidth() > fs {
        return Err(Error::Config(format!(
            "occupied bandwidth {:.4e} Hz exceeds the output sample rate {:.4e} Hz",
            plan.occupied_bandwidth(),
            fs
        )));
    }
    let bps = c.bits_per_symbol();
    let chunk = n_sc * bps * 2;
    if bits.is_empty() || bits.len() % chunk != 0 {
        return Err(Error::InputLength {
            len: bits.len(),
            multiple: chunk,
        });
    }
    if params.preamble_len % 2 != 0 {
        return Err(Error::param("preamble_len", "must be even"));
    }
    let per_sc_bits = bits.len() / n_sc;
    let n_sym = per_sc_bits / bps + params.preamble_len;
    let sps_sc = params.sps_out * n_sc;
    let n = n_sym * sps_sc;
    let rrc = RrcFilter::new(plan.beta(), 2, params.rrc_span)?;

    let mut spec_x = vec![Complex64::new(0.0, 0.0); n];
    let mut spec_y = vec![Complex64::new(0.0, 0.0); n];
    let mut subcarriers = Vec::with_capacity(n_sc);
    for (sc, sc_bits) in bits.chunks_exact(per_sc_bits).enumerate() {
        let preamble_bits = prbs(params.preamble_len * bps, preamble_seed(sc));
        let mut source = qam_map(&preamble_bits, c)?;
        source.extend(qam_map(sc_bits, c)?);
        let frame = alamouti_encode(&source)?;
        let (tx_x, tx_y): (&[Complex64], Option<&[Complex64]>) = match params.mode {
            TxMode::Alamouti => (&frame.ex, Some(&frame.ey)),
            TxMode::SinglePol => (&frame.source, None),
        };
        let center = plan.center_bin(sc, n, fs);
        place_subcarrier(&mut spec_x, tx_x, &rrc, center, plan.sc_baud())?;
        if let Some(y) = tx_y {
            place_subcarrier(&mut spec_y, y, &rrc, center, plan.sc_baud())?;
        }
        subcarriers.push(SubcarrierTx {
            frame,
            payload_bits: sc_bits.to_vec(),
            preamble_len: params.preamble_len,
        });
    }
    ifft_in_place(&mut spec_x);
    ifft_in_place(&mut spec_y);
    normalize_power(&mut spec_x);
    normalize_power(&mut spec_y);
    Ok(TxOutput {
        waveform: DualPolWaveform::new(
            ComplexWaveform::new(spec_x, fs)?,
            ComplexWaveform::new(spec_y, fs)?,
        )?,
        subcarriers,
        mode: params.mode,
    })
}

/// Shapes `symbols` at 2 samples/symbol and adds its spectrum into the
/// composite spectrum `spec`, shifted by `center` bins.
fn place_subcarrier(
    spec: &mut [Complex64],
    symbols: &[Complex64],
    rrc: &RrcFilter,
    center: isize,
    sc_baud: f64,
) -> Result<()> {
    let shaped = rrc.shape_periodic(symbols, sc_baud)?;
    let mut local = shaped.into_samples();
    let l = local.len();
    fft_in_place(&mut local);
    let n = spec.len();
    // zero-padding interpolation: keep the sample amplitudes at the new rate
    let gain = n as f64 / l as f64;
    for (k, v) in local.iter().enumerate() {
        let signed = crate::fft::signed_bin(k, l);
        spec[wrap_bin(signed + center, n)] += v * gain;
    }
    Ok(())
}

fn normalize_power(x: &mut [Complex64]) {
    let p = x.iter().map(|s| s.norm_sqr()).sum::<f64>() / x.len().max(1) as f64;
    if p > 0.0 {
        let g = 1.0 / p.sqrt();
        for s in x.iter_mut() {
            *s *= g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn prbs_is_deterministic_and_balanced() {
        let a = prbs(1 << 20, 7);
        assert_eq!(a, prbs(1 << 20, 7));
        assert_eq!(a.len(), 1 << 20);
        let ones = a.iter().filter(|&&b| b == 1).count() as f64 / a.len() as f64;
        assert!((0.49..=0.51).contains(&ones), "{ones}");
        assert_eq!(prbs(3, 1).len(), 3);
    }

    #[test]
    fn prbs_seeds_differ_in_half_the_positions() {
        let a = prbs(1 << 16, 1);
        let b = prbs(1 << 16, 2);
        let diff = a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64;
        // binomial(2^16, 1/2): std 0.002
        assert!((diff - 0.5).abs() < 0.01, "{diff}");
    }

    #[test]
    fn alamouti_pair() {
        let s1 = c(1.0, 2.0);
        let s2 = c(-3.0, 0.5);
        let f = alamouti_encode(&[s1, s2]).unwrap();
        assert_eq!(f.ex, vec![s1, -s2.conj()]);
        assert_eq!(f.ey, vec![s2, s1.conj()]);
    }

    #[test]
    fn alamouti_edge_cases() {
        let zeros = vec![c(0.0, 0.0); 6];
        let f = alamouti_encode(&zeros).unwrap();
        assert!(f.ex.iter().chain(&f.ey).all(|v| v.norm() == 0.0));
        let real: Vec<Complex64> = (1..=4).map(|i| c(i as f64, 0.0)).collect();
        let f = alamouti_encode(&real).unwrap();
        assert_eq!(f.ex[1], -real[1]);
        assert_eq!(f.ex[3], -real[3]);
        assert_eq!(
            alamouti_encode(&real[..3]),
            Err(Error::InputLength {
                len: 3,
                multiple: 2
            })
        );
    }

    #[test]
    fn four_subcarrier_layout() {
        let plan = SubcarrierPlan::new(4, 50e9, 0.1).unwrap();
        assert_eq!(plan.sc_baud(), 12.5e9);
        let expected = [-20.625e9, -6.875e9, 6.875e9, 20.625e9];
        for (a, b) in plan.centers().iter().zip(expected) {
            assert!((a - b).abs() < 1.0, "{a} vs {b}");
        }
        assert!((plan.occupied_bandwidth() - 55e9).abs() < 1.0);
    }

    #[test]
    fn rejects_bandwidth_over_nyquist() {
        let plan = SubcarrierPlan::new(4, 50e9, 0.1).unwrap();
        let mut params = TxParams::new(plan);
        params.sps_out = 1;
        let cst = Constellation::qam(4).unwrap();
        let bits = prbs(4 * 2 * 2 * 16, 1);
        assert!(matches!(
            build_dscm_tx(&bits, &cst, &params),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn output_is_unit_power_per_polarization() {
        let plan = SubcarrierPlan::new(4, 50e9, 0.1).unwrap();
        let params = TxParams::new(plan);
        let cst = Constellation::qam(16).unwrap();
        let bits = prbs(4 * 4 * 1024, 3);
        let tx = build_dscm_tx(&bits, &cst, &params).unwrap();
        assert_eq!(tx.waveform.sample_rate(), 100e9);
        assert_eq!(tx.waveform.len(), (1024 + 512) * 8);
        assert!((tx.waveform.x().mean_power() - 1.0).abs() < 1e-12);
        assert!((tx.waveform.y().mean_power() - 1.0).abs() < 1e-12);
        assert_eq!(tx.subcarriers.len(), 4);
        assert_eq!(tx.subcarriers[2].frame.source.len(), 1024 + 512);
    }
}
