//! Simulation library for a simplified self-homodyne coherent optical link.
//!
//! The transmitter Alamouti-codes each digital subcarrier across the two
//! polarizations so that a receiver with a single 90° hybrid can recover the
//! data whatever the polarization state of the remotely delivered LO. The
//! modules follow the signal path:
//!
//! * [`signal`]: waveform types, QAM alphabets, RRC pulse shaping, resampling
//! * [`tx`]: PRBS, Alamouti encoding, subcarrier multiplexing
//! * [`channel`]: chromatic dispersion, Jones rotation, LO phase noise, OSNR loading
//! * [`frontend`]: single-hybrid polarization-projecting detection
//! * [`rx`]: GSOP, demultiplexing, FD-CDC, sync, the Alamouti LMS equalizer
//! * [`metrics`]: BER, Q², EVM, OSNR and theory references
//! * [`complexity`]: multiplier/adder accounting for dispersion compensation

pub mod channel;
pub mod complexity;
mod error;
pub mod fft;
pub mod frontend;
pub mod metrics;
pub mod rx;
pub mod signal;
pub mod tx;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// OSNR reference bandwidth: 0.1 nm at 1550 nm.
pub const OSNR_REF_BANDWIDTH_HZ: f64 = 12.5e9;
