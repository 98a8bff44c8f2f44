use shc_core::channel::{apply_channel, rotation_matrix, ChannelConfig};
use shc_core::frontend::{coherent_detect, LoState};
use shc_core::rx::{rx_pipeline, EqualizerConfig, RxConfig, SyncMode};
use shc_core::signal::{ComplexWaveform, Constellation, DualPolWaveform};
use shc_core::tx::{build_dscm_tx, prbs, SubcarrierPlan, TxOutput, TxParams};
use shc_core::Complex64;

fn transmit(
    order: usize,
    n_sc: usize,
    n_sym: usize,
    seed: u64,
) -> (Constellation, SubcarrierPlan, TxOutput) {
    let c = Constellation::qam(order).unwrap();
    let plan = SubcarrierPlan::new(n_sc, 50e9, 0.1).unwrap();
    let bits = prbs(n_sym * n_sc * c.bits_per_symbol(), seed);
    let tx = build_dscm_tx(&bits, &c, &TxParams::new(plan.clone())).unwrap();
    (c, plan, tx)
}

fn carrier(tx: &TxOutput) -> ComplexWaveform {
    ComplexWaveform::new(
        vec![Complex64::new(1.0, 0.0); tx.waveform.len()],
        tx.waveform.sample_rate(),
    )
    .unwrap()
}

fn eq() -> EqualizerConfig {
    EqualizerConfig {
        n_train: 2000,
        ..Default::default()
    }
}

#[test]
fn back_to_back_is_error_free() {
    for (order, n_sc) in [(16, 4), (32, 4), (4, 1), (64, 4)] {
        let (c, plan, tx) = transmit(order, n_sc, 8192, 1);
        let det = coherent_detect(&tx.waveform, &LoState::aligned(tx.waveform.len())).unwrap();
        let r = rx_pipeline(&det, &RxConfig::new(plan, eq()), &tx.subcarriers, &c).unwrap();
        assert_eq!(r.subcarriers.len(), n_sc);
        for sc in &r.subcarriers {
            assert_eq!(sc.ber.bit_errors, 0, "M={order} n_sc={n_sc}");
            assert!(sc.evm_db < -25.0, "M={order}: {}", sc.evm_db);
            assert_eq!(sc.sync.unwrap().offset, 0);
        }
    }
}

#[test]
fn error_free_at_any_lo_polarization() {
    let (c, plan, tx) = transmit(16, 4, 8192, 2);
    for (az, el) in [(90.0, 0.0), (45.0, 45.0), (-30.0, -90.0), (-90.0, 60.0)] {
        let ch = ChannelConfig {
            azimuth_deg: az,
            elevation_deg: el,
            ..Default::default()
        };
        let (sig, lo) = apply_channel(&tx.waveform, &carrier(&tx), &ch, 5).unwrap();
        let det = coherent_detect(&sig, &lo).unwrap();
        let r = rx_pipeline(
            &det,
            &RxConfig::new(plan.clone(), eq()),
            &tx.subcarriers,
            &c,
        )
        .unwrap();
        assert_eq!(r.report.total.bit_errors, 0, "az {az} el {el}");
    }
}

#[test]
fn static_phase_offset_is_absorbed() {
    let (c, plan, tx) = transmit(4, 4, 8192, 3);
    let n = tx.waveform.len();
    let lo = LoState::new(
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![0.5; n],
        0.0,
    )
    .unwrap();
    let ch = ChannelConfig {
        osnr_db: Some(30.0),
        ..Default::default()
    };
    let (sig, _) = apply_channel(&tx.waveform, &carrier(&tx), &ch, 9).unwrap();
    let det = coherent_detect(&sig, &lo).unwrap();
    let r = rx_pipeline(&det, &RxConfig::new(plan, eq()), &tx.subcarriers, &c).unwrap();
    assert_eq!(r.report.total.bit_errors, 0);
}

#[test]
fn joint_rotation_of_signal_and_lo_changes_nothing() {
    let (c, plan, tx) = transmit(16, 4, 4096, 4);
    let ch = ChannelConfig {
        azimuth_deg: 20.0,
        elevation_deg: 35.0,
        osnr_db: Some(22.0),
        linewidth_hz: 1e5,
        ..Default::default()
    };
    let (sig, lo) = apply_channel(&tx.waveform, &carrier(&tx), &ch, 6).unwrap();
    let r = rotation_matrix(-55.0, 80.0);
    let sig_r: DualPolWaveform = r.apply(&sig).unwrap();
    let lo_r = lo.with_jones(r.apply_vector(lo.jones())).unwrap();
    let a = coherent_detect(&sig, &lo).unwrap();
    let b = coherent_detect(&sig_r, &lo_r).unwrap();
    for (u, v) in a.samples().iter().zip(b.samples()) {
        assert!((u - v).norm() < 1e-12);
    }
    let cfg = RxConfig::new(plan, eq());
    let ra = rx_pipeline(&a, &cfg, &tx.subcarriers, &c).unwrap();
    let rb = rx_pipeline(&b, &cfg, &tx.subcarriers, &c).unwrap();
    assert_eq!(ra.report, rb.report);
}

#[test]
fn genie_timing_matches_correlation_in_back_to_back() {
    let (c, plan, tx) = transmit(16, 4, 4096, 8);
    let det = coherent_detect(&tx.waveform, &LoState::aligned(tx.waveform.len())).unwrap();
    let mut cfg = RxConfig::new(plan, eq());
    let corr = rx_pipeline(&det, &cfg, &tx.subcarriers, &c).unwrap();
    cfg.sync = SyncMode::Genie;
    let genie = rx_pipeline(&det, &cfg, &tx.subcarriers, &c).unwrap();
    assert_eq!(corr.report, genie.report);
}
