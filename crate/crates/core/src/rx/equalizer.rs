//! T/2-spaced Alamouti 2x2 LMS equalizer with a one-tap phase factor.
//!
//! The 2 samples/symbol input is split into blocks of two symbol slots. For
//! block `m` the odd observation window `xo` is centered on sample `4m` and
//! the even window `xe` on sample `4m + 2`; the even window is conjugated so
//! both branches are linear in the transmitted pair. With
//! `A1 = w11·xo`, `B1 = w12·xe`, `A2 = w21·xo`, `B2 = w22·xe`:
//!
//! ```text
//! s_o = A1 p + B1 p*        s_e = A2 p + B2 p*
//! ```
//!
//! and `p = (p1 + p2) / 2`.

use num_complex::Complex64;

use crate::signal::Constellation;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// How the two phase factors are driven by the output errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseUpdate {
    /// `p1 += mu_p e_o conj(A1)`, `p2 += mu_p e_o conj(B1)`.
    ///
    /// The `p2` term moves the phase against its own gradient whenever the
    /// signal arrives mostly through the `p*` branch (LO near the Y axis),
    /// which costs about 1 dB there.
    Verbatim,
    /// As `Verbatim` but `p2 += mu_p e_e conj(B2)`.
    EvenError,
    /// Stochastic gradient of `|e_o|^2 + |e_e|^2`:
    /// `p1 += mu_p (e_o conj(A1) + e_e conj(A2))`,
    /// `p2 += mu_p (conj(e_o) B1 + conj(e_e) B2)`.
    #[default]
    Gradient,
}

impl PhaseUpdate {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseUpdate::Verbatim => "verbatim",
            PhaseUpdate::EvenError => "even-error",
            PhaseUpdate::Gradient => "gradient",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            PhaseUpdate::Verbatim,
            PhaseUpdate::EvenError,
            PhaseUpdate::Gradient,
        ]
        .into_iter()
        .find(|p| p.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqualizerMode {
    /// Known symbols for `n_train` blocks, then hard decisions.
    #[default]
    TrainThenDecide,
    /// Known symbols throughout.
    TrainOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizerConfig {
    pub n_taps: usize,
    pub mu: f64,
    pub mu_p: f64,
    /// Training length in blocks of two symbols.
    pub n_train: usize,
    pub mode: EqualizerMode,
    pub phase_update: PhaseUpdate,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        EqualizerConfig {
            n_taps: 9,
            mu: 3e-3,
            mu_p: 5e-2,
            n_train: 10_000,
            mode: EqualizerMode::TrainThenDecide,
            phase_update: PhaseUpdate::Gradient,
        }
    }
}

impl EqualizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_taps == 0 || self.n_taps % 2 == 0 {
            return Err(Error::param(
                "n_taps",
                format!("{} is not odd and positive", self.n_taps),
            ));
        }
        for (name, v) in [("mu", self.mu), ("mu_p", self.mu_p)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, format!("{v} not in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Tap vectors and phase factors.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerState {
    pub w11: Vec<Complex64>,
    pub w12: Vec<Complex64>,
    pub w21: Vec<Complex64>,
    pub w22: Vec<Complex64>,
    pub p1: Complex64,
    pub p2: Complex64,
    pub p: Complex64,
}

/// Intermediate products of one block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockOutput {
    pub a1: Complex64,
    pub b1: Complex64,
    pub a2: Complex64,
    pub b2: Complex64,
    pub s_o: Complex64,
    pub s_e: Complex64,
}

fn dot(w: &[Complex64], x: &[Complex64]) -> Complex64 {
    w.iter().zip(x).fold(ZERO, |acc, (a, b)| acc + a * b)
}

fn lms(w: &mut [Complex64], g: Complex64, x: &[Complex64]) {
    for (wi, xi) in w.iter_mut().zip(x) {
        *wi += g * xi.conj();
    }
}

impl EqualizerState {
    /// Center spike on `w11`, other taps zero, `p1 = p2 = 1`.
    pub fn new(n_taps: usize) -> Self {
        let mut w11 = vec![ZERO; n_taps];
        w11[n_taps / 2] = ONE;
        EqualizerState {
            w11,
            w12: vec![ZERO; n_taps],
            w21: vec![ZERO; n_taps],
            w22: vec![ZERO; n_taps],
            p1: ONE,
            p2: ONE,
            p: ONE,
        }
    }

    pub fn n_taps(&self) -> usize {
        self.w11.len()
    }

    pub fn outputs(&self, xo: &[Complex64], xe: &[Complex64]) -> BlockOutput {
        let a1 = dot(&self.w11, xo);
        let b1 = dot(&self.w12, xe);
        let a2 = dot(&self.w21, xo);
        let b2 = dot(&self.w22, xe);
        let p = self.p;
        BlockOutput {
            a1,
            b1,
            a2,
            b2,
            s_o: a1 * p + b1 * p.conj(),
            s_e: a2 * p + b2 * p.conj(),
        }
    }

    /// One LMS step given the block products and the output errors.
    ///
    /// A zero error leaves the corresponding taps and phase terms untouched,
    /// so `e_o = e_e = 0` is a bit-exact fixed point.
    pub fn update(
        &mut self,
        xo: &[Complex64],
        xe: &[Complex64],
        out: &BlockOutput,
        e_o: Complex64,
        e_e: Complex64,
        cfg: &EqualizerConfig,
    ) {
        let mag = self.p.norm();
        let (rot, rot_c) = if mag > 0.0 {
            (self.p.conj() / mag, self.p / mag)
        } else {
            (ONE, ONE)
        };
        if e_o != ZERO {
            lms(&mut self.w11, e_o * rot * cfg.mu, xo);
            lms(&mut self.w12, e_o * rot_c * cfg.mu, xe);
        }
        if e_e != ZERO {
            lms(&mut self.w21, e_e * rot * cfg.mu, xo);
            lms(&mut self.w22, e_e * rot_c * cfg.mu, xe);
        }
        let mp = cfg.mu_p;
        let (d1, d2) = match cfg.phase_update {
            PhaseUpdate::Verbatim => (e_o * out.a1.conj(), e_o * out.b1.conj()),
            PhaseUpdate::EvenError => (e_o * out.a1.conj(), e_e * out.b2.conj()),
            PhaseUpdate::Gradient => (
                e_o * out.a1.conj() + e_e * out.a2.conj(),
                e_o.conj() * out.b1 + e_e.conj() * out.b2,
            ),
        };
        if d1 != ZERO || d2 != ZERO {
            self.p1 += d1 * mp;
            self.p2 += d2 * mp;
            self.p = (self.p1 + self.p2) / 2.0;
        }
    }

    fn is_finite(&self) -> bool {
        self.p.re.is_finite()
            && self.p.im.is_finite()
            && [&self.w11, &self.w12, &self.w21, &self.w22]
                .iter()
                .all(|w| w.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerOutput {
    /// Recovered symbols, one per symbol slot.
    pub symbols: Vec<Complex64>,
    pub state: EqualizerState,
    /// `(|e_o|^2 + |e_e|^2) / 2` per block.
    pub error_trace: Vec<f64>,
}

/// Blocks per window of the divergence monitor.
pub const DIVERGENCE_WINDOW: usize = 1000;
/// Growth of the windowed mean error magnitude that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

/// Runs the equalizer once over a 2 samples/symbol stream that is aligned so
/// sample 0 is the first symbol slot. `training` supplies the known symbols;
/// it must cover `n_train` blocks (or every block in `TrainOnly` mode).
/// The stream is treated as periodic at its edges.
pub fn alamouti_equalize(
    samples: &[Complex64],
    cfg: &EqualizerConfig,
    training: &[Complex64],
    constellation: &Constellation,
) -> Result<EqualizerOutput> {
    cfg.validate()?;
    let len = samples.len();
    if len == 0 || len % 4 != 0 {
        return Err(Error::InputLength { len, multiple: 4 });
    }
    let n_blocks = len / 4;
    let needed = match cfg.mode {
        EqualizerMode::TrainThenDecide => cfg.n_train.min(n_blocks),
        EqualizerMode::TrainOnly => n_blocks,
    };
    if training.len() < 2 * needed {
        return Err(Error::param(
            "training",
            format!("{} symbols, need {}", training.len(), 2 * needed),
        ));
    }
    let n_taps = cfg.n_taps;
    let half = (n_taps / 2) as isize;
    let mut state = EqualizerState::new(n_taps);
    let mut xo = vec![ZERO; n_taps];
    let mut xe = vec![ZERO; n_taps];
    let mut symbols = Vec::with_capacity(2 * n_blocks);
    let mut trace = Vec::with_capacity(n_blocks);
    let mut monitor = DivergenceMonitor::default();
    let at = |i: isize| samples[i.rem_euclid(len as isize) as usize];
    for m in 0..n_blocks {
        let c_o = 4 * m as isize;
        for (k, (o, e)) in xo.iter_mut().zip(xe.iter_mut()).enumerate() {
            let off = k as isize - half;
            *o = at(c_o + off);
            *e = at(c_o + 2 + off).conj();
        }
        let out = state.outputs(&xo, &xe);
        let (d_o, d_e) = if m < needed {
            (training[2 * m], training[2 * m + 1])
        } else {
            (constellation.slice(out.s_o), constellation.slice(out.s_e))
        };
        let e_o = d_o - out.s_o;
        let e_e = d_e - out.s_e;
        state.update(&xo, &xe, &out, e_o, e_e, cfg);
        symbols.push(out.s_o);
        symbols.push(out.s_e);
        trace.push((e_o.norm_sqr() + e_e.norm_sqr()) / 2.0);
        let diverged = !state.is_finite() || monitor.push((e_o.norm() + e_e.norm()) / 2.0);
        if diverged {
            return Err(Error::Divergence {
                mu: cfg.mu,
                mu_p: cfg.mu_p,
                block: m,
            });
        }
    }
    Ok(EqualizerOutput {
        symbols,
        state,
        error_trace: trace,
    })
}

#[derive(Debug, Default)]
struct DivergenceMonitor {
    sum: f64,
    count: usize,
    initial: Option<f64>,
}

impl DivergenceMonitor {
    /// Returns true once a full window's mean error exceeds the first
    /// window's by [`DIVERGENCE_FACTOR`].
    fn push(&mut self, e: f64) -> bool {
        if !e.is_finite() {
            return true;
        }
        self.sum += e;
        self.count += 1;
        if self.count < DIVERGENCE_WINDOW {
            return false;
        }
        let mean = self.sum / self.count as f64;
        self.sum = 0.0;
        self.count = 0;
        match self.initial {
            None => {
                self.initial = Some(mean);
                false
            }
            Some(first) => mean > DIVERGENCE_FACTOR * first.max(1e-6),
        }
    }
}

/// Single-input T/2 LMS equalizer with a one-tap phase factor, for the
/// uncoded single-polarization baseline. Output `y = p (w·x)`.
#[allow(clippy::needless_range_loop)]
pub fn single_pol_equalize(
    samples: &[Complex64],
    cfg: &EqualizerConfig,
    training: &[Complex64],
    constellation: &Constellation,
) -> Result<EqualizerOutput> {
    cfg.validate()?;
    let len = samples.len();
    if len == 0 || len % 2 != 0 {
        return Err(Error::InputLength { len, multiple: 2 });
    }
    let n_sym = len / 2;
    let needed = match cfg.mode {
        EqualizerMode::TrainThenDecide => (2 * cfg.n_train).min(n_sym),
        EqualizerMode::TrainOnly => n_sym,
    };
    if training.len() < needed {
        return Err(Error::param(
            "training",
            format!("{} symbols, need {needed}", training.len()),
        ));
    }
    let half = (cfg.n_taps / 2) as isize;
    let mut state = EqualizerState::new(cfg.n_taps);
    let mut x = vec![ZERO; cfg.n_taps];
    let mut symbols = Vec::with_capacity(n_sym);
    let mut trace = Vec::with_capacity(n_sym);
    let at = |i: isize| samples[i.rem_euclid(len as isize) as usize];
    for k in 0..n_sym {
        for (j, v) in x.iter_mut().enumerate() {
            *v = at(2 * k as isize + j as isize - half);
        }
        let a = dot(&state.w11, &x);
        let y = a * state.p;
        let d = if k < needed {
            training[k]
        } else {
            constellation.slice(y)
        };
        let e = d - y;
        if e != ZERO {
            let mag = state.p.norm().max(f64::MIN_POSITIVE);
            lms(&mut state.w11, e * state.p.conj() / mag * cfg.mu, &x);
            state.p1 += e * a.conj() * cfg.mu_p;
            state.p2 = state.p1;
            state.p = state.p1;
        }
        symbols.push(y);
        trace.push(e.norm_sqr());
    }
    Ok(EqualizerOutput {
        symbols,
        state,
        error_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{qam_map, RrcFilter};
    use crate::tx::{alamouti_encode, prbs};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Noiseless received stream at 2 sps: `(a ex + b ey) e^{j theta}`.
    fn stream(
        n_sym: usize,
        a: Complex64,
        b: Complex64,
        theta: f64,
        order: usize,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = Constellation::qam(order).unwrap();
        let s = qam_map(&prbs(n_sym * c.bits_per_symbol(), 4), &c).unwrap();
        let f = alamouti_encode(&s).unwrap();
        let rot = Complex64::from_polar(1.0, theta);
        let mixed: Vec<Complex64> =
            f.ex.iter()
                .zip(&f.ey)
                .map(|(x, y)| (a * x + b * y) * rot)
                .collect();
        // long span so pulse truncation does not set the error floor
        let rrc = RrcFilter::new(0.1, 2, 512).unwrap();
        let tx = rrc.shape_periodic(&mixed, 1.0).unwrap();
        (rrc.filter_periodic(&tx).unwrap().into_samples(), s)
    }

    fn symbol_errors(
        out: &[Complex64],
        src: &[Complex64],
        c: &Constellation,
        from: usize,
    ) -> usize {
        out[from..]
            .iter()
            .zip(&src[from..])
            .filter(|(y, s)| c.decide(**y) != c.decide(**s))
            .count()
    }

    fn cfg(n_taps: usize, update: PhaseUpdate) -> EqualizerConfig {
        EqualizerConfig {
            n_taps,
            n_train: 4000,
            phase_update: update,
            ..Default::default()
        }
    }

    #[test]
    fn identity_channel_converges() {
        let c = Constellation::qam(4).unwrap();
        let (r, s) = stream(16384, ONE, ZERO, 0.0, 4);
        let out = alamouti_equalize(&r, &cfg(1, PhaseUpdate::Gradient), &s, &c).unwrap();
        assert_eq!(symbol_errors(&out.symbols, &s, &c, 2000), 0);
        let tail = &out.error_trace[out.error_trace.len() - 1000..];
        let mean_abs = tail.iter().map(|e| e.sqrt()).sum::<f64>() / tail.len() as f64;
        assert!(mean_abs < 1e-3, "{mean_abs}");
    }

    #[test]
    fn zero_error_is_a_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut rc = || Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let n = 7;
        let mut st = EqualizerState::new(n);
        for w in [&mut st.w11, &mut st.w12, &mut st.w21, &mut st.w22] {
            for v in w.iter_mut() {
                *v = rc();
            }
        }
        st.p1 = rc();
        st.p2 = rc();
        st.p = (st.p1 + st.p2) / 2.0;
        let xo: Vec<Complex64> = (0..n).map(|_| rc()).collect();
        let xe: Vec<Complex64> = (0..n).map(|_| rc()).collect();
        for update in [
            PhaseUpdate::Verbatim,
            PhaseUpdate::EvenError,
            PhaseUpdate::Gradient,
        ] {
            let mut next = st.clone();
            let out = next.outputs(&xo, &xe);
            next.update(&xo, &xe, &out, ZERO, ZERO, &cfg(n, update));
            assert_eq!(next, st);
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(4, PhaseUpdate::Verbatim).validate().is_err());
        assert!(EqualizerConfig {
            mu: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EqualizerConfig {
            mu_p: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(EqualizerConfig::default().validate().is_ok());
        assert_eq!(PhaseUpdate::parse("gradient"), Some(PhaseUpdate::Gradient));
        assert_eq!(PhaseUpdate::parse("nope"), None);
    }
}
