use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use shc_sim::output::write_outputs;
use shc_sim::{run_experiment, with_workers, CliError, Experiment, ExperimentConfig, WORKERS_ENV};

/// Run one simulation experiment and write its CSV plus a JSON manifest.
#[derive(Debug, Parser)]
#[command(name = "shc-sim", version)]
struct Args {
    /// pol-sweep, osnr-sweep, tap-sweep, cdc-complexity or loopback.
    experiment: Experiment,

    /// Flat `key = value` config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override one config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// CSV output path; the manifest goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sweep points.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

fn run(args: Args) -> Result<serde_json::Value, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::parse(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    for o in &args.overrides {
        cfg.apply_override(o)?;
    }
    cfg.experiment = args.experiment;
    let out = match (&args.out, &cfg.output) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => {
            return Err(CliError::InvalidValue {
                key: "output".into(),
                value: String::new(),
                reason: "no CSV path: pass --out or set `output`".into(),
            })
        }
    };
    cfg.output = Some(out.display().to_string());
    let table = with_workers(args.workers, || run_experiment(&cfg))??;
    let manifest = write_outputs(&cfg, &table, &out)?;
    Ok(json!({
        "status": "ok",
        "experiment": cfg.experiment.as_str(),
        "rows": table.rows.len(),
        "csv": out.display().to_string(),
        "manifest": manifest.display().to_string(),
    }))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let rendered = e.to_string();
            let msg = rendered
                .lines()
                .next()
                .unwrap_or_default()
                .trim_start_matches("error: ")
                .to_string();
            eprintln!("{}", json!({"error": {"kind": "usage", "message": msg}}));
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(args) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": e.kind(), "message": e.to_string()}})
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
