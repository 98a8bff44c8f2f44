use std::path::Path;
use std::process::Command;

use shc_sim::config::ExperimentConfig;
use shc_sim::experiments::{run_loopback, run_osnr_sweep, run_pol_sweep};
use shc_sim::output::{manifest_path, write_outputs};
use shc_sim::{run_experiment, with_workers, Experiment};

const SMALL: &str = "
symbols_per_point = 16384
eq.n_train = 4000
channel.osnr_db = 24
";

fn small(experiment: Experiment) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::parse(SMALL).unwrap();
    cfg.experiment = experiment;
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shc-sim"))
}

#[test]
fn complexity_table_matches_golden() {
    let cfg = small(Experiment::CdcComplexity);
    let csv = run_experiment(&cfg).unwrap().to_csv().unwrap();
    let golden = std::fs::read(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/cdc_complexity.csv"),
    )
    .unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap(),
        String::from_utf8(golden).unwrap()
    );
}

#[test]
fn schemas_are_pinned() {
    let header = |e: Experiment, extra: &[&str]| {
        let mut cfg = small(e);
        for o in extra {
            cfg.apply_override(o).unwrap();
        }
        run_experiment(&cfg).unwrap().header.join(",")
    };
    assert_eq!(
        header(Experiment::Loopback, &[]),
        "ber,bit_errors,bits,evm_db,q2_db,ber_sc1,ber_sc2,ber_sc3,ber_sc4,status"
    );
    assert_eq!(
        header(Experiment::PolSweep, &["pol.step_deg=180"]),
        "azimuth_deg,elevation_deg,ber,bit_errors,evm_db,q2_db,status"
    );
    assert_eq!(
        header(Experiment::OsnrSweep, &["osnr.list=24"]),
        "osnr_db,ber_avg,ber_sc1,ber_sc2,ber_sc3,ber_sc4,theory_ber,bit_errors,low_confidence,status"
    );
    assert_eq!(
        header(Experiment::TapSweep, &["taps.list=3", "taps.fft_sizes=64"]),
        "curve,n_taps,ber,bit_errors,is_knee,status"
    );
}

#[test]
fn pol_sweep_is_deterministic_across_worker_counts() {
    let mut cfg = small(Experiment::PolSweep);
    cfg.pol_step_deg = 90.0;
    let one = with_workers(Some(1), || run_experiment(&cfg))
        .unwrap()
        .unwrap();
    let three = with_workers(Some(3), || run_experiment(&cfg))
        .unwrap()
        .unwrap();
    assert_eq!(one.to_csv().unwrap(), three.to_csv().unwrap());
    // 3 x 3 grid plus the summary row
    assert_eq!(one.rows.len(), 10);
    assert_eq!(one.rows[9][6], "q2-spread");
    assert_eq!(one.column("status").unwrap()[..9], ["ok"; 9]);
}

#[test]
fn first_grid_point_equals_a_plain_run() {
    let mut cfg = small(Experiment::PolSweep);
    cfg.pol_step_deg = 180.0;
    let sweep = run_pol_sweep(&cfg).unwrap();
    let p = &sweep.points[0];
    cfg.channel.azimuth_deg = p.azimuth_deg;
    cfg.channel.elevation_deg = p.elevation_deg;
    assert_eq!(run_loopback(&cfg).unwrap().outcome, p.outcome);
}

#[test]
fn noise_off_gives_zero_ber() {
    let mut cfg = small(Experiment::OsnrSweep);
    cfg.apply_override("osnr.list = 24, off").unwrap();
    let sweep = run_osnr_sweep(&cfg).unwrap();
    let last = sweep.points.last().unwrap();
    assert_eq!(last.osnr_db, None);
    assert_eq!(last.theory_ber, 0.0);
    let stats = last.outcome.as_ref().unwrap();
    assert_eq!(stats.bit_errors, 0);
    assert!(stats.low_confidence);
    assert!(sweep.points[0].outcome.as_ref().unwrap().ber > 0.0);
}

#[test]
fn tap_sweep_marks_one_knee_per_curve() {
    let mut cfg = small(Experiment::TapSweep);
    cfg.apply_override("taps.list = 1,3,5").unwrap();
    cfg.apply_override("taps.fft_sizes = 64").unwrap();
    let t = run_experiment(&cfg).unwrap();
    assert_eq!(t.rows.len(), 4 * 3);
    for chunk in t.rows.chunks(3) {
        assert_eq!(
            chunk.iter().filter(|r| r[4] == "true").count(),
            1,
            "{chunk:?}"
        );
    }
}

#[test]
fn manifest_reproduces_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pol.csv");
    let mut cfg = small(Experiment::PolSweep);
    cfg.pol_step_deg = 180.0;
    let table = run_experiment(&cfg).unwrap();
    let manifest = write_outputs(&cfg, &table, &csv).unwrap();
    assert_eq!(manifest, manifest_path(&csv));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(json["seed"], 1);
    assert_eq!(json["experiment"], "pol-sweep");
    let echoed = ExperimentConfig::parse(json["config"].as_str().unwrap()).unwrap();
    assert_eq!(echoed, cfg);
    let again = run_experiment(&echoed).unwrap().to_csv().unwrap();
    assert_eq!(again, std::fs::read(&csv).unwrap());
}

#[test]
fn binary_success_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# complexity table\nexperiment = loopback\n").unwrap();
    let out = dir.path().join("c.csv");
    let o = bin()
        .args(["cdc-complexity", "--config"])
        .arg(&conf)
        .args(["--set", "complexity.fft_sizes=64,512", "--out"])
        .arg(&out)
        .env("SHC_SIM_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["rows"], 4);
    assert!(std::fs::read_to_string(&out)
        .unwrap()
        .starts_with("scheme,fft_size"));
    assert!(manifest_path(&out).exists());
}

#[test]
fn binary_failures_emit_one_json_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let cases: [(&[&str], i32, &str); 4] = [
        (&["loopback", "--set", "bogus=1"], 2, "config"),
        (&["loopback", "--set", "eq.n_taps=4"], 2, "config"),
        (&["loopback", "--config", "/nonexistent/run.conf"], 3, "io"),
        (&["not-an-experiment"], 2, "usage"),
    ];
    for (args, code, kind) in cases {
        let o = bin()
            .args(args)
            .arg("--out")
            .arg(&out)
            .env_remove("SHC_SIM_WORKERS")
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(code), "{args:?}");
        let stderr = String::from_utf8_lossy(&o.stderr);
        let line: serde_json::Value = serde_json::from_str(stderr.lines().next().unwrap()).unwrap();
        assert_eq!(line["error"]["kind"], kind, "{args:?}");
        assert!(line["error"]["message"]
            .as_str()
            .is_some_and(|m| !m.is_empty()));
    }
    let o = bin()
        .args(["loopback", "--workers", "0", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(!o.status.success());
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            let cfg = ExperimentConfig::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
            cfg.validate()
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert_eq!(seen, 5);
}
