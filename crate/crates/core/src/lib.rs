//! Physical conventions, waveform processing, channel simulation and the
//! statistical tests that gate key generation for a discrete-modulated
//! (QPSK) continuous-variable QKD link with a transmitted local oscillator.
//!
//! All quadrature values in this crate are in shot-noise units with the
//! heterodyne convention documented in [`protocol::snu`].

pub mod channel;
pub mod dsp;
pub mod error;
pub mod protocol;
pub mod records;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
