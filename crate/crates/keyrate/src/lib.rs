//! Reliable numerical lower bounds on the conditional entropy of the key
//! map, finite-size corrections and the secure key length.

pub mod engine;
pub mod error;
pub mod constraints;
pub mod finite;
pub mod fock;
pub mod honest;
pub mod linalg;
pub mod objective;
pub mod quad;
pub mod regions;
pub mod sdp;
pub mod solver;

pub use error::{Error, Result};
