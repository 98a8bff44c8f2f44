//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Dotted keys group related settings (`channel.osnr_db`, `eq.mu`). Every key
//! has a default, unknown keys are rejected, and `--set key=value`
//! overrides go through the same parser as file lines. [`KEYS`] is the
//! documented schema.

use std::collections::HashSet;
use std::fmt::Display;
use std::str::FromStr;

use shc_core::channel::ChannelConfig;
use shc_core::rx::{EqualizerConfig, EqualizerMode, PhaseUpdate, SyncMode};
use shc_core::signal::Constellation;
use shc_core::tx::TxMode;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Experiment {
    PolSweep,
    OsnrSweep,
    TapSweep,
    CdcComplexity,
    #[default]
    Loopback,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::PolSweep,
        Experiment::OsnrSweep,
        Experiment::TapSweep,
        Experiment::CdcComplexity,
        Experiment::Loopback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::PolSweep => "pol-sweep",
            Experiment::OsnrSweep => "osnr-sweep",
            Experiment::TapSweep => "tap-sweep",
            Experiment::CdcComplexity => "cdc-complexity",
            Experiment::Loopback => "loopback",
        }
    }

    fn simulates(self) -> bool {
        self != Experiment::CdcComplexity
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "expected one of {}",
                    names(Experiment::ALL.map(|e| e.as_str()))
                )
            })
    }
}

impl Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the polarization sweep takes its Q² from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Q2Source {
    /// Effective SNR from the EVM, mapped through the theoretical BER.
    #[default]
    Evm,
    /// Counted BER.
    Ber,
}

/// Receiver dispersion handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CdcMode {
    /// Left to the equalizer taps.
    #[default]
    None,
    FdCdc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub modulation: usize,
    pub n_sc: usize,
    pub total_baud: f64,
    pub beta: f64,
    pub symbols_per_point: usize,
    pub seed: u64,
    pub output: Option<String>,
    pub tx_mode: TxMode,
    pub sync: SyncMode,
    pub channel: ChannelConfig,
    pub eq: EqualizerConfig,
    pub cdc: CdcMode,
    pub cdc_fft_size: usize,
    /// `None` derives the overlap from the dispersion.
    pub cdc_overlap: Option<usize>,
    pub pol_step_deg: f64,
    pub q2_source: Q2Source,
    /// `None` entries switch the noise off.
    pub osnr_list: Vec<Option<f64>>,
    pub tap_list: Vec<usize>,
    pub tap_fft_sizes: Vec<usize>,
    pub tap_sc_fft_size: usize,
    pub complexity_fft_sizes: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::default(),
            modulation: 16,
            n_sc: 4,
            total_baud: 50e9,
            beta: 0.1,
            symbols_per_point: 1 << 16,
            seed: 1,
            output: None,
            tx_mode: TxMode::Alamouti,
            sync: SyncMode::Correlate,
            channel: ChannelConfig::default(),
            eq: EqualizerConfig::default(),
            cdc: CdcMode::None,
            cdc_fft_size: 64,
            cdc_overlap: None,
            pol_step_deg: 15.0,
            q2_source: Q2Source::Evm,
            osnr_list: (18..=26).map(|v| Some(v as f64)).collect(),
            tap_list: (1..=61).step_by(2).collect(),
            tap_fft_sizes: vec![64, 128, 256],
            tap_sc_fft_size: 512,
            complexity_fft_sizes: (6..=12).map(|p| 1 << p).collect(),
        }
    }
}

/// Every accepted key with a one-line description, in echo order.
pub const KEYS: &[(&str, &str)] = &[
    (
        "experiment",
        "pol-sweep | osnr-sweep | tap-sweep | cdc-complexity | loopback",
    ),
    ("modulation", "QAM order: 4, 16, 32 or 64"),
    ("n_sc", "number of digital subcarriers (1 = single carrier)"),
    ("total_baud", "aggregate symbol rate in Bd"),
    ("beta", "RRC roll-off"),
    (
        "symbols_per_point",
        "payload symbols per subcarrier per sweep point",
    ),
    ("seed", "base seed; every sweep point derives its own"),
    ("output", "CSV path (the --out flag takes precedence)"),
    ("tx.mode", "alamouti | single-pol"),
    ("rx.sync", "correlate | genie"),
    ("channel.fiber_km", "SMF length in km"),
    ("channel.dispersion_ps_nm_km", "dispersion parameter D"),
    ("channel.wavelength_nm", "carrier wavelength"),
    (
        "channel.azimuth_deg",
        "LO polarization azimuth in [-90, 90]",
    ),
    (
        "channel.elevation_deg",
        "LO polarization elevation in [-90, 90]",
    ),
    ("channel.linewidth_hz", "effective LO-path linewidth"),
    ("channel.osnr_db", "OSNR in 0.1 nm, or `off`"),
    ("eq.n_taps", "odd tap count per filter"),
    ("eq.mu", "tap step size"),
    ("eq.mu_p", "phase-factor step size"),
    ("eq.n_train", "training blocks (two symbols each)"),
    ("eq.mode", "train-then-decide | train-only"),
    ("eq.phase_update", "gradient | verbatim | even-error"),
    ("cdc", "none | fd-cdc"),
    ("cdc.fft_size", "overlap-save FFT size"),
    ("cdc.overlap", "samples dropped per block edge, or `auto`"),
    (
        "pol.step_deg",
        "grid step of the polarization sweep; must divide 180",
    ),
    ("pol.q2_source", "evm | ber"),
    (
        "osnr.list",
        "ascending OSNR values in dB; `off` disables noise",
    ),
    ("taps.list", "ascending odd tap counts"),
    (
        "taps.fft_sizes",
        "FD-CDC FFT sizes for the subcarrier curves",
    ),
    (
        "taps.sc_fft_size",
        "FD-CDC FFT size for the single-carrier curve",
    ),
    (
        "complexity.fft_sizes",
        "FFT sizes tabulated by cdc-complexity",
    ),
];

fn names<const N: usize>(items: [&str; N]) -> String {
    items.join(", ")
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e: T::Err| CliError::invalid(key, value, e.to_string()))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_num(key, value)?;
    if !v.is_finite() {
        return Err(CliError::invalid(key, value, "must be finite"));
    }
    Ok(v)
}

fn parse_list<T>(key: &str, value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(CliError::invalid(key, value, "empty list"));
    }
    Ok(items)
}

fn parse_osnr(key: &str, value: &str) -> Result<Option<f64>> {
    match value {
        "off" | "inf" => Ok(None),
        v => parse_f64(key, v).map(Some),
    }
}

fn fmt_osnr(v: Option<f64>) -> String {
    v.map_or_else(|| "off".to_string(), |x| x.to_string())
}

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)]) -> Result<T> {
    options
        .iter()
        .find(|(name, _)| *name == value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let all: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::invalid(key, value, format!("expected one of {}", all.join(", ")))
        })
}

const TX_MODES: &[(&str, TxMode)] = &[
    ("alamouti", TxMode::Alamouti),
    ("single-pol", TxMode::SinglePol),
];
const SYNC_MODES: &[(&str, SyncMode)] = &[
    ("correlate", SyncMode::Correlate),
    ("genie", SyncMode::Genie),
];
const EQ_MODES: &[(&str, EqualizerMode)] = &[
    ("train-then-decide", EqualizerMode::TrainThenDecide),
    ("train-only", EqualizerMode::TrainOnly),
];
const CDC_MODES: &[(&str, CdcMode)] = &[("none", CdcMode::None), ("fd-cdc", CdcMode::FdCdc)];
const Q2_SOURCES: &[(&str, Q2Source)] = &[("evm", Q2Source::Evm), ("ber", Q2Source::Ber)];

fn name_of<T: PartialEq>(options: &[(&'static str, T)], v: &T) -> &'static str {
    options.iter().find(|(_, o)| o == v).map_or("?", |(n, _)| n)
}

impl ExperimentConfig {
    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Syntax {
                line: line_no,
                reason: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::DuplicateKey {
                    key: key.to_string(),
                    line: line_no,
                });
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::Override(assignment.to_string()))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                self.experiment = value
                    .parse()
                    .map_err(|e: String| CliError::invalid(key, value, e))?
            }
            "modulation" => {
                let m = parse_num(key, value)?;
                Constellation::qam(m).map_err(|e| CliError::invalid(key, value, e.to_string()))?;
                self.modulation = m;
            }
            "n_sc" => self.n_sc = parse_num(key, value)?,
            "total_baud" => self.total_baud = parse_f64(key, value)?,
            "beta" => self.beta = parse_f64(key, value)?,
            "symbols_per_point" => self.symbols_per_point = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "output" => self.output = (!value.is_empty()).then(|| value.to_string()),
            "tx.mode" => self.tx_mode = choice(key, value, TX_MODES)?,
            "rx.sync" => self.sync = choice(key, value, SYNC_MODES)?,
            "channel.fiber_km" => self.channel.fiber_km = parse_f64(key, value)?,
            "channel.dispersion_ps_nm_km" => {
                self.channel.dispersion_ps_nm_km = parse_f64(key, value)?
            }
            "channel.wavelength_nm" => self.channel.wavelength_nm = parse_f64(key, value)?,
            "channel.azimuth_deg" => self.channel.azimuth_deg = parse_f64(key, value)?,
            "channel.elevation_deg" => self.channel.elevation_deg = parse_f64(key, value)?,
            "channel.linewidth_hz" => self.channel.linewidth_hz = parse_f64(key, value)?,
            "channel.osnr_db" => self.channel.osnr_db = parse_osnr(key, value)?,
            "eq.n_taps" => self.eq.n_taps = parse_num(key, value)?,
            "eq.mu" => self.eq.mu = parse_f64(key, value)?,
            "eq.mu_p" => self.eq.mu_p = parse_f64(key, value)?,
            "eq.n_train" => self.eq.n_train = parse_num(key, value)?,
            "eq.mode" => self.eq.mode = choice(key, value, EQ_MODES)?,
            "eq.phase_update" => {
                self.eq.phase_update = PhaseUpdate::parse(value).ok_or_else(|| {
                    CliError::invalid(key, value, "expected gradient, verbatim or even-error")
                })?
            }
            "cdc" => self.cdc = choice(key, value, CDC_MODES)?,
            "cdc.fft_size" => self.cdc_fft_size = parse_num(key, value)?,
            "cdc.overlap" => {
                self.cdc_overlap = match value {
                    "auto" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "pol.step_deg" => self.pol_step_deg = parse_f64(key, value)?,
            "pol.q2_source" => self.q2_source = choice(key, value, Q2_SOURCES)?,
            "osnr.list" => self.osnr_list = parse_list(key, value, |v| parse_osnr(key, v))?,
            "taps.list" => self.tap_list = parse_list(key, value, |v| parse_num(key, v))?,
            "taps.fft_sizes" => self.tap_fft_sizes = parse_list(key, value, |v| parse_num(key, v))?,
            "taps.sc_fft_size" => self.tap_sc_fft_size = parse_num(key, value)?,
            "complexity.fft_sizes" => {
                self.complexity_fft_sizes = parse_list(key, value, |v| parse_num(key, v))?
            }
            _ => return Err(CliError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Current value of `key` in the same syntax [`ExperimentConfig::set`] accepts.
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "experiment" => self.experiment.to_string(),
            "modulation" => self.modulation.to_string(),
            "n_sc" => self.n_sc.to_string(),
            "total_baud" => self.total_baud.to_string(),
            "beta" => self.beta.to_string(),
            "symbols_per_point" => self.symbols_per_point.to_string(),
            "seed" => self.seed.to_string(),
            "output" => self.output.clone().unwrap_or_default(),
            "tx.mode" => name_of(TX_MODES, &self.tx_mode).to_string(),
            "rx.sync" => name_of(SYNC_MODES, &self.sync).to_string(),
            "channel.fiber_km" => self.channel.fiber_km.to_string(),
            "channel.dispersion_ps_nm_km" => self.channel.dispersion_ps_nm_km.to_string(),
            "channel.wavelength_nm" => self.channel.wavelength_nm.to_string(),
            "channel.azimuth_deg" => self.channel.azimuth_deg.to_string(),
            "channel.elevation_deg" => self.channel.elevation_deg.to_string(),
            "channel.linewidth_hz" => self.channel.linewidth_hz.to_string(),
            "channel.osnr_db" => fmt_osnr(self.channel.osnr_db),
            "eq.n_taps" => self.eq.n_taps.to_string(),
            "eq.mu" => self.eq.mu.to_string(),
            "eq.mu_p" => self.eq.mu_p.to_string(),
            "eq.n_train" => self.eq.n_train.to_string(),
            "eq.mode" => name_of(EQ_MODES, &self.eq.mode).to_string(),
            "eq.phase_update" => self.eq.phase_update.as_str().to_string(),
            "cdc" => name_of(CDC_MODES, &self.cdc).to_string(),
            "cdc.fft_size" => self.cdc_fft_size.to_string(),
            "cdc.overlap" => self
                .cdc_overlap
                .map_or_else(|| "auto".to_string(), |v| v.to_string()),
            "pol.step_deg" => self.pol_step_deg.to_string(),
            "pol.q2_source" => name_of(Q2_SOURCES, &self.q2_source).to_string(),
            "osnr.list" => self
                .osnr_list
                .iter()
                .map(|v| fmt_osnr(*v))
                .collect::<Vec<_>>()
                .join(","),
            "taps.list" => join(&self.tap_list),
            "taps.fft_sizes" => join(&self.tap_fft_sizes),
            "taps.sc_fft_size" => self.tap_sc_fft_size.to_string(),
            "complexity.fft_sizes" => join(&self.complexity_fft_sizes),
            _ => return None,
        };
        Some(v)
    }

    /// All keys with their resolved values, in schema order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .map(|(k, _)| (*k, self.get(k).expect("every schema key has a getter")))
            .collect()
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Cross-field checks that do not need a simulation run.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(CliError::invalid(
                key,
                &self.get(key).unwrap_or_default(),
                reason,
            ))
        };
        if self.n_sc == 0 {
            return bad("n_sc", "at least one subcarrier");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad("beta", "must lie in [0, 1]");
        }
        if self.total_baud <= 0.0 {
            return bad("total_baud", "must be positive");
        }
        self.channel.validate()?;
        self.eq.validate()?;
        if !self.experiment.simulates() {
            if self
                .complexity_fft_sizes
                .iter()
                .any(|n| !n.is_power_of_two())
            {
                return bad("complexity.fft_sizes", "FFT sizes must be powers of two");
            }
            return Ok(());
        }
        if self.symbols_per_point < 1 << 14 || self.symbols_per_point % 2 != 0 {
            return bad("symbols_per_point", "must be even and at least 16384");
        }
        match self.experiment {
            Experiment::PolSweep => {
                let steps = 180.0 / self.pol_step_deg;
                if !(self.pol_step_deg > 0.0 && (steps - steps.round()).abs() < 1e-9) {
                    return bad("pol.step_deg", "must divide 180");
                }
            }
            Experiment::OsnrSweep => {
                let key = |v: &Option<f64>| v.unwrap_or(f64::INFINITY);
                if self.osnr_list.windows(2).any(|w| key(&w[0]) >= key(&w[1])) {
                    return bad("osnr.list", "must be strictly ascending");
                }
            }
            Experiment::TapSweep
                if (self.tap_list.iter().any(|t| t % 2 == 0)
                    || self.tap_list.windows(2).any(|w| w[0] >= w[1])) =>
            {
                return bad("taps.list", "must be odd and strictly ascending");
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let cfg = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn every_key_has_a_getter_and_setter() {
        let cfg = ExperimentConfig::default();
        for (k, _) in KEYS {
            let mut c = cfg.clone();
            let v = c.get(k).unwrap();
            c.set(k, &v).unwrap();
            assert_eq!(c, cfg, "{k}");
        }
    }

    #[test]
    fn comments_blanks_and_overrides() {
        let text = "# header\n\nexperiment = osnr-sweep  # trailing\nmodulation=32\nchannel.osnr_db = off\nosnr.list = 20, 21,off\n";
        let mut cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.experiment, Experiment::OsnrSweep);
        assert_eq!(cfg.modulation, 32);
        assert_eq!(cfg.channel.osnr_db, None);
        assert_eq!(cfg.osnr_list, vec![Some(20.0), Some(21.0), None]);
        cfg.apply_override("eq.mu = 0.01").unwrap();
        assert_eq!(cfg.eq.mu, 0.01);
        cfg.apply_override("cdc.overlap=12").unwrap();
        assert_eq!(cfg.cdc_overlap, Some(12));
    }

    #[test]
    fn errors_name_the_problem() {
        assert!(
            matches!(ExperimentConfig::parse("bogus = 1"), Err(CliError::UnknownKey(k)) if k == "bogus")
        );
        assert!(matches!(
            ExperimentConfig::parse("\nseed 4"),
            Err(CliError::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("seed = 1\nseed = 2"),
            Err(CliError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("modulation = 8"),
            Err(CliError::InvalidValue { .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("eq.mu = nan"),
            Err(CliError::InvalidValue { .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse("taps.list = ,"),
            Err(CliError::InvalidValue { .. })
        ));
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(
            cfg.apply_override("seed"),
            Err(CliError::Override(_))
        ));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.experiment = Experiment::PolSweep;
        cfg.pol_step_deg = 7.0;
        assert!(cfg.validate().is_err());
        cfg.pol_step_deg = 22.5;
        cfg.validate().unwrap();
        cfg.experiment = Experiment::TapSweep;
        cfg.tap_list = vec![1, 4];
        assert!(cfg.validate().is_err());
        cfg.experiment = Experiment::OsnrSweep;
        cfg.osnr_list = vec![Some(20.0), None, Some(21.0)];
        assert!(cfg.validate().is_err());
        cfg.experiment = Experiment::Loopback;
        cfg.symbols_per_point = 1000;
        assert!(cfg.validate().is_err());
        cfg.experiment = Experiment::CdcComplexity;
        cfg.validate().unwrap();
        cfg.eq.n_taps = 4;
        assert!(cfg.validate().is_err());
    }
}
