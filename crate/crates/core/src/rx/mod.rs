//! Receiver DSP: GSOP, subcarrier demultiplexing, matched filtering,
//! optional FD-CDC, synchronization, Alamouti equalization and demapping.

mod cdc;
mod demux;
mod equalizer;
mod gsop;
mod sync;

pub use cdc::{default_overlap, fd_cdc, CdcConfig};
pub use demux::subcarrier_demux;
pub use equalizer::{
    alamouti_equalize, single_pol_equalize, BlockOutput, EqualizerConfig, EqualizerMode,
    EqualizerOutput, EqualizerState, PhaseUpdate, DIVERGENCE_FACTOR, DIVERGENCE_WINDOW,
};
pub use gsop::gsop;
pub use sync::{find_offset, synchronize, SyncResult, MIN_REFERENCE_LEN, PEAK_TO_MEDIAN};

use num_complex::Complex64;

use crate::metrics::{count_ber, evm_db, BerCount, BerReport};
use crate::signal::{qam_demap, ComplexWaveform, Constellation, RrcFilter};
use crate::tx::{SubcarrierPlan, SubcarrierTx, TxMode};
use crate::{Error, Result};

/// Samples per symbol of every per-subcarrier stage.
pub const RX_SPS: usize = 2;

/// How the receiver finds symbol timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyncMode {
    /// Preamble correlation.
    #[default]
    Correlate,
    /// Assume the stream is already aligned (offset 0).
    Genie,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxConfig {
    pub plan: SubcarrierPlan,
    pub rrc_span: usize,
    /// `None` leaves dispersion to the equalizer.
    pub cdc: Option<CdcConfig>,
    pub eq: EqualizerConfig,
    pub sync: SyncMode,
    pub mode: TxMode,
    /// Symbols at the end of the frame left out of BER and EVM.
    pub tail_guard: usize,
}

impl RxConfig {
    pub fn new(plan: SubcarrierPlan, eq: EqualizerConfig) -> Self {
        RxConfig {
            plan,
            rrc_span: 64,
            cdc: None,
            eq,
            sync: SyncMode::Correlate,
            mode: TxMode::Alamouti,
            tail_guard: 64,
        }
    }
}

/// A subcarrier stream ready for equalization: 2 samples/symbol, unit power
/// at the symbol instants, sample 0 on the first preamble symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSubcarrier {
    pub samples: ComplexWaveform,
    pub sync: Option<SyncResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierResult {
    pub ber: BerCount,
    pub evm_db: f64,
    pub sync: Option<SyncResult>,
    /// Mean of the last 1000 entries of the error trace.
    pub final_mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RxResult {
    pub report: BerReport,
    pub subcarriers: Vec<SubcarrierResult>,
}

impl RxResult {
    /// EVM over all subcarriers (power average).
    pub fn evm_db(&self) -> f64 {
        let lin = self
            .subcarriers
            .iter()
            .map(|s| 10f64.powf(s.evm_db / 10.0))
            .sum::<f64>()
            / self.subcarriers.len().max(1) as f64;
        10.0 * lin.log10()
    }
}

/// Every stage up to and including synchronization.
pub fn prepare_subcarriers(
    detected: &ComplexWaveform,
    cfg: &RxConfig,
    reference: &[SubcarrierTx],
) -> Result<Vec<PreparedSubcarrier>> {
    if reference.len() != cfg.plan.n_sc() {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: cfg.plan.n_sc(),
        });
    }
    let orth = gsop(detected)?;
    let streams = subcarrier_demux(&orth, &cfg.plan, RX_SPS)?;
    let rrc = RrcFilter::new(cfg.plan.beta(), RX_SPS, cfg.rrc_span)?;
    streams
        .iter()
        .zip(reference)
        .map(|(s, r)| {
            let mut w = rrc.filter_periodic(s)?;
            if let Some(cdc) = &cfg.cdc {
                w = fd_cdc(&w, cdc)?;
            }
            let w = normalize_symbol_power(&w)?;
            let pre = r.preamble_len;
            match cfg.sync {
                SyncMode::Genie => Ok(PreparedSubcarrier {
                    samples: w,
                    sync: None,
                }),
                SyncMode::Correlate => {
                    let refs: Vec<&[Complex64]> = match cfg.mode {
                        TxMode::Alamouti => vec![&r.frame.ex[..pre], &r.frame.ey[..pre]],
                        TxMode::SinglePol => vec![&r.frame.source[..pre]],
                    };
                    let (aligned, res) = synchronize(&w, &refs)?;
                    Ok(PreparedSubcarrier {
                        samples: aligned,
                        sync: Some(res),
                    })
                }
            }
        })
        .collect()
}

fn normalize_symbol_power(w: &ComplexWaveform) -> Result<ComplexWaveform> {
    let s = w.samples();
    let n = s.len().div_ceil(RX_SPS).max(1) as f64;
    let p = s.iter().step_by(RX_SPS).map(|v| v.norm_sqr()).sum::<f64>() / n;
    if p.is_nan() || p <= 0.0 {
        return Err(Error::Degenerate("subcarrier carries no power"));
    }
    w.scaled(1.0 / p.sqrt())
}

/// First symbol index that counts towards BER: after the preamble and the
/// training blocks.
pub fn scored_start(cfg: &EqualizerConfig, preamble_len: usize) -> usize {
    let train = match cfg.mode {
        EqualizerMode::TrainThenDecide => 2 * cfg.n_train,
        EqualizerMode::TrainOnly => 0,
    };
    preamble_len.max(train)
}

/// Equalizes one prepared subcarrier and scores it against the reference.
pub fn equalize_subcarrier(
    prepared: &PreparedSubcarrier,
    reference: &SubcarrierTx,
    constellation: &Constellation,
    cfg: &RxConfig,
) -> Result<SubcarrierResult> {
    let source = &reference.frame.source;
    let out = match cfg.mode {
        TxMode::Alamouti => {
            alamouti_equalize(prepared.samples.samples(), &cfg.eq, source, constellation)?
        }
        TxMode::SinglePol => {
            single_pol_equalize(prepared.samples.samples(), &cfg.eq, source, constellation)?
        }
    };
    let start = scored_start(&cfg.eq, reference.preamble_len);
    let end = out.symbols.len().saturating_sub(cfg.tail_guard);
    if start >= end {
        return Err(Error::param(
            "n_train",
            format!(
                "training and guards cover all {} symbols",
                out.symbols.len()
            ),
        ));
    }
    let rx = &out.symbols[start..end];
    let tx = &source[start..end];
    let ber = count_ber(&qam_demap(tx, constellation), &qam_demap(rx, constellation))?;
    let evm = evm_db(rx, tx)?;
    let tail = &out.error_trace[out.error_trace.len().saturating_sub(1000)..];
    let final_mse = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
    Ok(SubcarrierResult {
        ber,
        evm_db: evm,
        sync: prepared.sync,
        final_mse,
    })
}

/// Full receiver chain on the detected photocurrent.
pub fn rx_pipeline(
    detected: &ComplexWaveform,
    cfg: &RxConfig,
    reference: &[SubcarrierTx],
    constellation: &Constellation,
) -> Result<RxResult> {
    let prepared = prepare_subcarriers(detected, cfg, reference)?;
    let subcarriers = prepared
        .iter()
        .zip(reference)
        .map(|(p, r)| equalize_subcarrier(p, r, constellation, cfg))
        .collect::<Result<Vec<_>>>()?;
    let report = BerReport::from_subcarriers(subcarriers.iter().map(|s| s.ber).collect())?;
    Ok(RxResult {
        report,
        subcarriers,
    })
}
