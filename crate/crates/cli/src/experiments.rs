//! Experiment runners. Each returns typed results plus a [`Table`] view.
//!
//! Sweep points run on the current rayon pool. Every point gets its own
//! seed derived from the base seed and the point index, so results do not
//! depend on scheduling, and rows are emitted in grid order.

use rayon::prelude::*;

use shc_core::channel::ChannelConfig;
use shc_core::complexity::{complexity_table_with, Scheme};
use shc_core::frontend::coherent_detect;
use shc_core::metrics::{
    q_factor_db, q_factor_from_evm_db, snr_from_osnr_db, theory_ber_qam, BerReport,
};
use shc_core::rx::{
    default_overlap, equalize_subcarrier, prepare_subcarriers, rx_pipeline, CdcConfig,
    PreparedSubcarrier, RxConfig, RxResult, RX_SPS,
};
use shc_core::signal::{ComplexWaveform, Constellation};
use shc_core::tx::{build_dscm_tx, prbs, SubcarrierPlan, TxOutput, TxParams};
use shc_core::Complex64;

use crate::analysis::knee_index;
use crate::config::{ExperimentConfig, Q2Source};
use crate::error::Result;
use crate::output::{fmt_ber, fmt_db, Table};

const STREAM_BITS: u64 = 1;
const STREAM_CHANNEL: u64 = 2;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of item `index` in random stream `stream`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(stream.rotate_left(32) ^ index))
}

/// Failures that mark a point instead of aborting the run.
fn recordable(e: &shc_core::Error) -> Option<&'static str> {
    match e {
        shc_core::Error::SyncFailure { .. } => Some("sync-failure"),
        shc_core::Error::Divergence { .. } => Some("diverged"),
        shc_core::Error::Degenerate(_) => Some("degenerate"),
        _ => None,
    }
}

/// Splits a point result into a recorded status or a fatal error.
fn settle<T>(r: shc_core::Result<T>) -> Result<Result<T, &'static str>> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) => match recordable(&e) {
            Some(status) => Ok(Err(status)),
            None => Err(e.into()),
        },
    }
}

/// Transmitter output and everything needed to push it through a channel.
pub struct Link {
    pub plan: SubcarrierPlan,
    pub constellation: Constellation,
    pub tx: TxOutput,
    carrier: ComplexWaveform,
}

impl Link {
    /// Transmitter for `n_sc` subcarriers with the config's payload size.
    pub fn build(cfg: &ExperimentConfig, n_sc: usize) -> Result<Self> {
        let constellation = Constellation::qam(cfg.modulation)?;
        let plan = SubcarrierPlan::new(n_sc, cfg.total_baud, cfg.beta)?;
        let mut params = TxParams::new(plan.clone());
        params.mode = cfg.tx_mode;
        let n_bits = cfg.symbols_per_point * n_sc * constellation.bits_per_symbol();
        let bits = prbs(n_bits, derive_seed(cfg.seed, STREAM_BITS, n_sc as u64));
        let tx = build_dscm_tx(&bits, &constellation, &params)?;
        let carrier = ComplexWaveform::new(
            vec![Complex64::new(1.0, 0.0); tx.waveform.len()],
            tx.waveform.sample_rate(),
        )?;
        Ok(Link {
            plan,
            constellation,
            tx,
            carrier,
        })
    }

    /// Photocurrent after the channel and the single-hybrid front-end.
    pub fn detect(&self, channel: &ChannelConfig, seed: u64) -> shc_core::Result<ComplexWaveform> {
        let (sig, lo) =
            shc_core::channel::apply_channel(&self.tx.waveform, &self.carrier, channel, seed)?;
        coherent_detect(&sig, &lo)
    }

    /// Receiver settings; `cdc_fft` enables FD-CDC with that FFT size.
    pub fn rx_config(
        &self,
        cfg: &ExperimentConfig,
        channel: &ChannelConfig,
        cdc_fft: Option<usize>,
    ) -> Result<RxConfig> {
        let mut rx = RxConfig::new(self.plan.clone(), cfg.eq);
        rx.mode = cfg.tx_mode;
        rx.sync = cfg.sync;
        if let Some(n) = cdc_fft {
            let dispersion = channel.dispersion();
            let fs = RX_SPS as f64 * self.plan.sc_baud();
            let overlap = cfg
                .cdc_overlap
                .unwrap_or_else(|| default_overlap(&dispersion, fs));
            rx.cdc = Some(CdcConfig::new(n, overlap, dispersion)?);
        }
        Ok(rx)
    }

    pub fn receive(&self, detected: &ComplexWaveform, rx: &RxConfig) -> shc_core::Result<RxResult> {
        rx_pipeline(detected, rx, &self.tx.subcarriers, &self.constellation)
    }
}

/// Scalar summary of one simulated point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub ber: f64,
    pub bit_errors: u64,
    pub bits: u64,
    pub per_subcarrier: Vec<f64>,
    pub evm_db: f64,
    pub q2_db: f64,
    pub low_confidence: bool,
}

impl PointStats {
    fn new(report: &BerReport, evm_db: f64, cfg: &ExperimentConfig) -> Self {
        let ber = report.ber();
        let q2_db = match cfg.q2_source {
            Q2Source::Evm => q_factor_from_evm_db(evm_db, cfg.modulation).unwrap_or(f64::NAN),
            Q2Source::Ber if ber == 0.0 => f64::INFINITY,
            Q2Source::Ber => q_factor_db(ber).unwrap_or(f64::NAN),
        };
        PointStats {
            ber,
            bit_errors: report.total.bit_errors,
            bits: report.total.bits_compared,
            per_subcarrier: report.per_subcarrier.iter().map(|c| c.ber).collect(),
            evm_db,
            q2_db,
            low_confidence: report.low_confidence(),
        }
    }

    fn from_result(r: &RxResult, cfg: &ExperimentConfig) -> Self {
        Self::new(&r.report, r.evm_db(), cfg)
    }
}

pub type Outcome = Result<PointStats, &'static str>;

fn status(o: &Outcome) -> String {
    match o {
        Ok(_) => "ok".to_string(),
        Err(s) => s.to_string(),
    }
}

fn opt_cell(o: &Outcome, f: impl Fn(&PointStats) -> String) -> String {
    o.as_ref().map(f).unwrap_or_default()
}

fn cdc_fft(cfg: &ExperimentConfig) -> Option<usize> {
    match cfg.cdc {
        crate::config::CdcMode::None => None,
        crate::config::CdcMode::FdCdc => Some(cfg.cdc_fft_size),
    }
}

fn simulate(
    link: &Link,
    cfg: &ExperimentConfig,
    channel: &ChannelConfig,
    seed: u64,
) -> Result<Outcome> {
    let rx = link.rx_config(cfg, channel, cdc_fft(cfg))?;
    let detected = match settle(link.detect(channel, seed))? {
        Ok(d) => d,
        Err(s) => return Ok(Err(s)),
    };
    Ok(settle(link.receive(&detected, &rx))?.map(|r| PointStats::from_result(&r, cfg)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loopback {
    pub n_sc: usize,
    pub outcome: Outcome,
}

pub fn run_loopback(cfg: &ExperimentConfig) -> Result<Loopback> {
    let link = Link::build(cfg, cfg.n_sc)?;
    let outcome = simulate(
        &link,
        cfg,
        &cfg.channel,
        derive_seed(cfg.seed, STREAM_CHANNEL, 0),
    )?;
    Ok(Loopback {
        n_sc: cfg.n_sc,
        outcome,
    })
}

impl Loopback {
    pub fn table(&self) -> Table {
        let mut header = vec!["ber", "bit_errors", "bits", "evm_db", "q2_db"]
            .into_iter()
            .map(String::from)
            .collect::<Vec<_>>();
        header.extend((1..=self.n_sc).map(|k| format!("ber_sc{k}")));
        header.push("status".into());
        let mut t = Table::new(header);
        let o = &self.outcome;
        let mut row = vec![
            opt_cell(o, |s| fmt_ber(s.ber)),
            opt_cell(o, |s| s.bit_errors.to_string()),
            opt_cell(o, |s| s.bits.to_string()),
            opt_cell(o, |s| fmt_db(s.evm_db)),
            opt_cell(o, |s| fmt_db(s.q2_db)),
        ];
        row.extend((0..self.n_sc).map(|k| opt_cell(o, |s| fmt_ber(s.per_subcarrier[k]))));
        row.push(status(o));
        t.push(row);
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolPoint {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolSweep {
    pub points: Vec<PolPoint>,
}

/// Grid angles `-90, -90 + step, ..., 90`.
pub fn pol_grid(step_deg: f64) -> Vec<f64> {
    let n = (180.0 / step_deg).round() as usize;
    (0..=n).map(|i| -90.0 + i as f64 * step_deg).collect()
}

pub fn run_pol_sweep(cfg: &ExperimentConfig) -> Result<PolSweep> {
    let link = Link::build(cfg, cfg.n_sc)?;
    let angles = pol_grid(cfg.pol_step_deg);
    let grid: Vec<(f64, f64)> = angles
        .iter()
        .flat_map(|&az| angles.iter().map(move |&el| (az, el)))
        .collect();
    let points = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(az, el))| {
            let channel = ChannelConfig {
                azimuth_deg: az,
                elevation_deg: el,
                ..cfg.channel.clone()
            };
            let outcome = simulate(
                &link,
                cfg,
                &channel,
                derive_seed(cfg.seed, STREAM_CHANNEL, i as u64),
            )?;
            Ok(PolPoint {
                azimuth_deg: az,
                elevation_deg: el,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolSweep { points })
}

impl PolSweep {
    /// max − min Q² over the points that completed.
    pub fn q2_spread(&self) -> Option<f64> {
        let q: Vec<f64> = self
            .points
            .iter()
            .filter_map(|p| p.outcome.as_ref().ok().map(|s| s.q2_db))
            .collect();
        let max = q.iter().copied().reduce(f64::max)?;
        let min = q.iter().copied().reduce(f64::min)?;
        Some(max - min)
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.outcome.is_err()).count()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "azimuth_deg",
            "elevation_deg",
            "ber",
            "bit_errors",
            "evm_db",
            "q2_db",
            "status",
        ]);
        for p in &self.points {
            let o = &p.outcome;
            t.push(vec![
                p.azimuth_deg.to_string(),
                p.elevation_deg.to_string(),
                opt_cell(o, |s| fmt_ber(s.ber)),
                opt_cell(o, |s| s.bit_errors.to_string()),
                opt_cell(o, |s| fmt_db(s.evm_db)),
                opt_cell(o, |s| fmt_db(s.q2_db)),
                status(o),
            ]);
        }
        let spread = self.q2_spread().map(fmt_db).unwrap_or_default();
        t.push(vec![
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            spread,
            "q2-spread".into(),
        ]);
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsnrPoint {
    /// `None` is the noise-free point.
    pub osnr_db: Option<f64>,
    pub theory_ber: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsnrSweep {
    pub n_sc: usize,
    pub points: Vec<OsnrPoint>,
}

pub fn run_osnr_sweep(cfg: &ExperimentConfig) -> Result<OsnrSweep> {
    let link = Link::build(cfg, cfg.n_sc)?;
    let points = cfg
        .osnr_list
        .par_iter()
        .enumerate()
        .map(|(i, &osnr)| {
            let channel = ChannelConfig {
                osnr_db: osnr,
                ..cfg.channel.clone()
            };
            let theory_ber = match osnr {
                Some(o) => theory_ber_qam(cfg.modulation, snr_from_osnr_db(o, cfg.total_baud))?,
                None => 0.0,
            };
            let outcome = simulate(
                &link,
                cfg,
                &channel,
                derive_seed(cfg.seed, STREAM_CHANNEL, i as u64),
            )?;
            Ok(OsnrPoint {
                osnr_db: osnr,
                theory_ber,
                outcome,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OsnrSweep {
        n_sc: cfg.n_sc,
        points,
    })
}

impl OsnrSweep {
    /// `(osnr, ber)` of the completed finite-OSNR points.
    pub fn curve(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| Some((p.osnr_db?, p.outcome.as_ref().ok()?.ber)))
            .collect()
    }

    pub fn theory_curve(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|p| Some((p.osnr_db?, p.theory_ber)))
            .collect()
    }

    pub fn table(&self) -> Table {
        let mut header = vec!["osnr_db".to_string(), "ber_avg".to_string()];
        header.extend((1..=self.n_sc).map(|k| format!("ber_sc{k}")));
        header.extend(["theory_ber", "bit_errors", "low_confidence", "status"].map(String::from));
        let mut t = Table::new(header);
        for p in &self.points {
            let o = &p.outcome;
            let mut row = vec![
                p.osnr_db
                    .map_or_else(|| "off".to_string(), |v| v.to_string()),
                opt_cell(o, |s| fmt_ber(s.ber)),
            ];
            row.extend((0..self.n_sc).map(|k| opt_cell(o, |s| fmt_ber(s.per_subcarrier[k]))));
            row.push(fmt_ber(p.theory_ber));
            row.push(opt_cell(o, |s| s.bit_errors.to_string()));
            row.push(opt_cell(o, |s| s.low_confidence.to_string()));
            row.push(status(o));
            t.push(row);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TapCurve {
    pub name: String,
    pub n_sc: usize,
    pub cdc_fft: Option<usize>,
    /// `(n_taps, outcome)` in tap order.
    pub points: Vec<(usize, Outcome)>,
}

impl TapCurve {
    /// Tap count of the knee: the smallest count within 10% of the floor.
    pub fn knee(&self) -> Option<usize> {
        let bers: Vec<f64> = self
            .points
            .iter()
            .map(|(_, o)| o.as_ref().map_or(f64::NAN, |s| s.ber))
            .collect();
        knee_index(&bers).map(|i| self.points[i].0)
    }

    /// Lowest BER over the curve.
    pub fn floor(&self) -> Option<f64> {
        self.points
            .iter()
            .filter_map(|(_, o)| o.as_ref().ok().map(|s| s.ber))
            .reduce(f64::min)
    }

    pub fn at(&self, n_taps: usize) -> Option<&PointStats> {
        self.points
            .iter()
            .find(|(t, _)| *t == n_taps)
            .and_then(|(_, o)| o.as_ref().ok())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TapSweep {
    pub curves: Vec<TapCurve>,
}

impl TapSweep {
    pub fn curve(&self, name: &str) -> Option<&TapCurve> {
        self.curves.iter().find(|c| c.name == name)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["curve", "n_taps", "ber", "bit_errors", "is_knee", "status"]);
        for c in &self.curves {
            let knee = c.knee();
            for (taps, o) in &c.points {
                t.push(vec![
                    c.name.clone(),
                    taps.to_string(),
                    opt_cell(o, |s| fmt_ber(s.ber)),
                    opt_cell(o, |s| s.bit_errors.to_string()),
                    (knee == Some(*taps)).to_string(),
                    status(o),
                ]);
            }
        }
        t
    }
}

/// Curve names and settings: FD-CDC at each configured FFT size and no CDC
/// for the configured subcarrier count, then the same pair for a single
/// carrier.
pub fn tap_curves(cfg: &ExperimentConfig) -> Vec<(String, usize, Option<usize>)> {
    let mut out: Vec<(String, usize, Option<usize>)> = cfg
        .tap_fft_sizes
        .iter()
        .map(|&n| (format!("dscm-fdcdc-n{n}"), cfg.n_sc, Some(n)))
        .collect();
    out.push(("dscm-nocdc".into(), cfg.n_sc, None));
    out.push((
        format!("sc-fdcdc-n{}", cfg.tap_sc_fft_size),
        1,
        Some(cfg.tap_sc_fft_size),
    ));
    out.push(("sc-nocdc".into(), 1, None));
    out
}

pub fn run_tap_sweep(cfg: &ExperimentConfig) -> Result<TapSweep> {
    let specs = tap_curves(cfg);
    let mut sizes: Vec<usize> = specs.iter().map(|s| s.1).collect();
    sizes.sort_unstable();
    sizes.dedup();
    // one transmitter and one channel realization per subcarrier count, so
    // curves of the same count differ only in the receiver
    let links = sizes
        .par_iter()
        .map(|&n_sc| {
            let link = Link::build(cfg, n_sc)?;
            let det = link.detect(
                &cfg.channel,
                derive_seed(cfg.seed, STREAM_CHANNEL, n_sc as u64),
            )?;
            Ok((n_sc, link, det))
        })
        .collect::<Result<Vec<_>>>()?;
    let find = |n_sc: usize| {
        links
            .iter()
            .find(|l| l.0 == n_sc)
            .expect("link built for every count")
    };

    let prepared = specs
        .par_iter()
        .map(|(_, n_sc, fft)| {
            let (_, link, det) = find(*n_sc);
            let rx = link.rx_config(cfg, &cfg.channel, *fft)?;
            let prep = settle(prepare_subcarriers(det, &rx, &link.tx.subcarriers))?;
            Ok((rx, prep))
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|c| cfg.tap_list.iter().map(move |&t| (c, t)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, taps)| {
            let (_, link, _) = find(specs[c].1);
            let (rx, prep) = &prepared[c];
            let prep: &Vec<PreparedSubcarrier> = match prep {
                Ok(p) => p,
                Err(s) => return Ok(Err(*s)),
            };
            let mut rx = rx.clone();
            rx.eq.n_taps = taps;
            let per_sc = prep
                .iter()
                .zip(&link.tx.subcarriers)
                .map(|(p, r)| equalize_subcarrier(p, r, &link.constellation, &rx))
                .collect::<shc_core::Result<Vec<_>>>()
                .and_then(|subs| {
                    Ok(RxResult {
                        report: BerReport::from_subcarriers(subs.iter().map(|s| s.ber).collect())?,
                        subcarriers: subs,
                    })
                });
            Ok(settle(per_sc)?.map(|r| PointStats::from_result(&r, cfg)))
        })
        .collect::<Result<Vec<Outcome>>>()?;

    let mut results = results.into_iter();
    let curves = specs
        .into_iter()
        .map(|(name, n_sc, cdc_fft)| TapCurve {
            name,
            n_sc,
            cdc_fft,
            points: cfg
                .tap_list
                .iter()
                .map(|&t| (t, results.next().expect("one result per job")))
                .collect(),
        })
        .collect();
    Ok(TapSweep { curves })
}

pub fn run_cdc_complexity(cfg: &ExperimentConfig) -> Result<Table> {
    let rows = complexity_table_with(&cfg.complexity_fft_sizes, &Scheme::ALL, |s| {
        s.preset_overlap()
            .map(|preset| cfg.cdc_overlap.unwrap_or(preset))
    })?;
    let mut t = Table::new([
        "scheme",
        "fft_size",
        "overlap",
        "per_symbol_mults",
        "per_symbol_adds",
    ]);
    for r in rows {
        t.push(vec![
            r.scheme.to_string(),
            r.fft_size.map(|n| n.to_string()).unwrap_or_default(),
            r.overlap.map(|n| n.to_string()).unwrap_or_default(),
            format!("{:.4}", r.report.per_symbol_mults),
            format!("{:.4}", r.report.per_symbol_adds),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000)
            .map(|i| derive_seed(7, STREAM_CHANNEL, i))
            .collect();
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), a.len());
        assert_ne!(
            derive_seed(7, STREAM_BITS, 0),
            derive_seed(7, STREAM_CHANNEL, 0)
        );
        assert_eq!(derive_seed(7, STREAM_CHANNEL, 3), a[3]);
    }

    #[test]
    fn grid_covers_both_ends() {
        let g = pol_grid(15.0);
        assert_eq!(g.len(), 13);
        assert_eq!(g[0], -90.0);
        assert_eq!(g[12], 90.0);
        assert_eq!(pol_grid(180.0), vec![-90.0, 90.0]);
    }

    #[test]
    fn curve_layout() {
        let cfg = ExperimentConfig::default();
        let names: Vec<String> = tap_curves(&cfg).into_iter().map(|c| c.0).collect();
        assert_eq!(
            names,
            [
                "dscm-fdcdc-n64",
                "dscm-fdcdc-n128",
                "dscm-fdcdc-n256",
                "dscm-nocdc",
                "sc-fdcdc-n512",
                "sc-nocdc"
            ]
        );
    }
}
