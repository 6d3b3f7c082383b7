//! Finite-size correction terms, the epsilon budget and the key length.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::solver::EntropyBound;

/// Number of key values of the quadrant key map.
pub const KEY_ALPHABET: usize = 4;

/// Rank of Alice's reduced state for four linearly independent states.
pub const RANK_RHO_X: usize = 4;

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `sqrt(w) log2|Z| + (1 + sqrt(w)) h(sqrt(w) / (1 + sqrt(w)))`.
pub fn delta_w(w: f64, z_dim: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) || z_dim == 0 {
        return Err(invalid(format!("need w in [0, 1] and |Z| > 0, got {w}, {z_dim}")));
    }
    let s = w.sqrt();
    Ok(s * (z_dim as f64).log2() + (1.0 + s) * binary_entropy(s / (1.0 + s)))
}

/// `2 log2(rank + 3) sqrt(log2(2 / eps) / n)`.
pub fn delta_aep(epsilon_bar: f64, rank_rho_x: usize, n: f64) -> Result<f64> {
    if !(n > 0.0) || !(epsilon_bar > 0.0 && epsilon_bar < 1.0) {
        return Err(invalid(format!("need n > 0 and eps in (0, 1), got {n}, {epsilon_bar}")));
    }
    Ok(2.0 * ((rank_rho_x + 3) as f64).log2() * ((2.0 / epsilon_bar).log2() / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBudget {
    pub et: f64,
    pub at: f64,
    pub bar: f64,
    pub ec: f64,
    pub pa: f64,
}

impl EpsilonBudget {
    /// `(1, 7, 7, 2, 1) / 10 * 1e-10`.
    pub const fn standard() -> Self {
        Self { et: 1e-11, at: 7e-11, bar: 7e-11, ec: 2e-11, pa: 1e-11 }
    }

    /// `eps_EC + max{eps_PA / 2 + eps_bar, eps_ET + eps_AT}`.
    pub fn total(&self) -> f64 {
        self.ec + self.secrecy(self.pa)
    }

    /// `max{eps_PA / 2 + eps_bar, eps_ET + eps_AT}` for a given PA parameter.
    pub fn secrecy(&self, pa: f64) -> f64 {
        (0.5 * pa + self.bar).max(self.et + self.at)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("et", self.et), ("at", self.at), ("bar", self.bar), ("ec", self.ec), ("pa", self.pa)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(format!("epsilon {name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for EpsilonBudget {
    fn default() -> Self {
        Self::standard()
    }
}

/// `eps_PA,imp` for a fixed subtraction of `bits` in privacy amplification.
pub fn pa_epsilon_for_bits(bits: f64) -> f64 {
    2f64.powf(-bits / 2.0)
}

/// `2 log2(1 / eps_PA)`.
pub fn pa_bits_for_epsilon(eps: f64) -> f64 {
    2.0 * (1.0 / eps).log2()
}

/// Syndrome cost per symbol for codes of efficiency `beta` against the BSC
/// capacity of each quadrature stream.
pub fn leak_per_symbol_from_efficiency(beta: f64, ber_x: f64, ber_p: f64) -> f64 {
    [ber_x, ber_p].iter().map(|&p| 1.0 - beta * (1.0 - binary_entropy(p))).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    pub delta_aep: f64,
    pub delta_w: f64,
}

impl Corrections {
    pub fn new(epsilon_bar: f64, n: f64, w: f64) -> Result<Self> {
        Ok(Self { delta_aep: delta_aep(epsilon_bar, RANK_RHO_X, n)?, delta_w: delta_w(w, KEY_ALPHABET)? })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyLengthReport {
    /// Certified lower bound on the conditional entropy (bits per key round).
    pub entropy_lb: f64,
    pub delta_aep: f64,
    pub delta_w: f64,
    pub leak_ec: f64,
    pub n: f64,
    pub n_total: f64,
    pub epsilon: EpsilonBudget,
    pub epsilon_total: f64,
    pub epsilon_pa_imp: f64,
    pub pa_bits: f64,
    /// Right-hand side of the leftover-hashing bound before flooring.
    pub bound_bits: f64,
    pub l: u64,
    pub rate: f64,
    /// Per-sent-symbol form `(n/N)[H - delta - Delta - 2 delta_leak] - pa/N`.
    pub rate_per_symbol_form: f64,
    pub abort: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<EntropyBound>,
}

/// `l = floor(n [H - delta(eps) - Delta(w)] - leak_EC - 2 log2(1/eps_PA,imp))`.
pub fn key_length(
    entropy_lb: f64,
    corrections: Corrections,
    leak_ec: f64,
    eps: EpsilonBudget,
    epsilon_pa_imp: f64,
    n: f64,
    n_total: f64,
) -> Result<KeyLengthReport> {
    for (name, v) in [("entropy", entropy_lb), ("leak", leak_ec), ("n", n), ("N", n_total)] {
        if !v.is_finite() {
            return Err(invalid(format!("{name} must be finite, got {v}")));
        }
    }
    if !(n > 0.0 && n_total >= n) {
        return Err(invalid(format!("need 0 < n <= N, got n = {n}, N = {n_total}")));
    }
    eps.validate()?;
    let pa_bits = pa_bits_for_epsilon(epsilon_pa_imp);
    let bound_bits = n * (entropy_lb - corrections.delta_aep - corrections.delta_w) - leak_ec - pa_bits;
    let abort = bound_bits < 1.0;
    let l = if abort { 0 } else { bound_bits.floor() as u64 };
    let delta_leak = leak_ec / (2.0 * n);
    let rate_per_symbol_form =
        n / n_total * (entropy_lb - corrections.delta_aep - corrections.delta_w - 2.0 * delta_leak) - pa_bits / n_total;
    Ok(KeyLengthReport {
        entropy_lb,
        delta_aep: corrections.delta_aep,
        delta_w: corrections.delta_w,
        leak_ec,
        n,
        n_total,
        epsilon: eps,
        epsilon_total: eps.total(),
        epsilon_pa_imp,
        pa_bits,
        bound_bits,
        l,
        rate: l as f64 / n_total,
        rate_per_symbol_form,
        abort,
        solver: None,
    })
}
