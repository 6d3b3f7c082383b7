//! Post-processing for a QPSK CV-QKD link: quadrant key map, LDPC reverse
//! reconciliation, confirmation, leak accounting, Toeplitz privacy
//! amplification and an authenticated two-peer session protocol.

pub mod auth;
pub mod bits;
pub mod confirm;
pub mod entropy;
pub mod epsilon;
pub mod error;
pub mod gf2;
pub mod keymap;
pub mod ldpc;
pub mod ledger;
pub mod pa;
pub mod session;
pub mod transport;
pub mod wire;

pub use error::{Error, Result};
