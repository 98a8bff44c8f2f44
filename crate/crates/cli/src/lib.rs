//! Experiment runner for the `shc-core` link simulator.
//!
//! A run is described by a flat [`ExperimentConfig`], produces a CSV
//! [`Table`] and writes a JSON [`Manifest`] next to it.
//!
//! | experiment       | CSV columns |
//! |------------------|-------------|
//! | `pol-sweep`      | azimuth_deg, elevation_deg, ber, bit_errors, evm_db, q2_db, status (last row: `q2-spread`) |
//! | `osnr-sweep`     | osnr_db, ber_avg, ber_sc1..ber_scN, theory_ber, bit_errors, low_confidence, status |
//! | `tap-sweep`      | curve, n_taps, ber, bit_errors, is_knee, status |
//! | `cdc-complexity` | scheme, fft_size, overlap, per_symbol_mults, per_symbol_adds |
//! | `loopback`       | ber, bit_errors, bits, evm_db, q2_db, ber_sc1..ber_scN, status |

pub mod analysis;
pub mod config;
mod error;
pub mod experiments;
pub mod output;

pub use config::{Experiment, ExperimentConfig};
pub use error::{CliError, Result};
pub use output::{Manifest, Table};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "SHC_SIM_WORKERS";

/// Runs the configured experiment and returns its CSV table.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    use experiments::*;
    Ok(match cfg.experiment {
        Experiment::PolSweep => run_pol_sweep(cfg)?.table(),
        Experiment::OsnrSweep => run_osnr_sweep(cfg)?.table(),
        Experiment::TapSweep => run_tap_sweep(cfg)?.table(),
        Experiment::CdcComplexity => run_cdc_complexity(cfg)?,
        Experiment::Loopback => run_loopback(cfg)?.table(),
    })
}

/// Runs `f` on a dedicated pool of `workers` threads (rayon's default when
/// `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(CliError::Pool("worker count must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}
