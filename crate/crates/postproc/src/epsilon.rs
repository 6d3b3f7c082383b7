//! Composition of the implementation security parameters.

use serde::{Deserialize, Serialize};

use crate::auth::epsilon_auth;
use crate::confirm::epsilon_cor;

/// Statistical distance of the random number generator from uniform.
pub const EPSILON_Q: f64 = 7.888609052210118e-31;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonInputs {
    pub epsilon_et: f64,
    pub epsilon_at: f64,
    pub epsilon_bar: f64,
    /// Bits subtracted in privacy amplification.
    pub pa_bits: f64,
    pub epsilon_q: f64,
}

impl Default for EpsilonInputs {
    fn default() -> Self {
        Self { epsilon_et: 1e-11, epsilon_at: 7e-11, epsilon_bar: 7e-11, pa_bits: 100.0, epsilon_q: EPSILON_Q }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonLedger {
    pub epsilon_pa_imp: f64,
    pub epsilon_cor: f64,
    pub epsilon_sec: f64,
    pub epsilon_auth: f64,
    pub epsilon_q: f64,
    /// `eps_Q + eps_sec + eps_cor`.
    pub epsilon_imp: f64,
}

/// `m_bits`: key bits before error correction minus those disclosed;
/// `t`: confirmation hash length; `c_bits`: authenticated transcript length;
/// `a`: tag length.
pub fn epsilon_ledger(p: &EpsilonInputs, m_bits: f64, t: u32, c_bits: f64, a: u32) -> EpsilonLedger {
    let epsilon_pa_imp = 2f64.powf(-p.pa_bits / 2.0);
    let epsilon_sec = (0.5 * epsilon_pa_imp + p.epsilon_bar).max(p.epsilon_et + p.epsilon_at);
    let epsilon_cor = epsilon_cor(m_bits, t);
    EpsilonLedger {
        epsilon_pa_imp,
        epsilon_cor,
        epsilon_sec,
        epsilon_auth: epsilon_auth(c_bits, a),
        epsilon_q: p.epsilon_q,
        epsilon_imp: p.epsilon_q + epsilon_sec + epsilon_cor,
    }
}
