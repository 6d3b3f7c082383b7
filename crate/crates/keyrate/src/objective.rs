//! `f(rho) = D(G(rho) || Z(G(rho)))` in bits and its gradient.
//!
//! `G(rho) = K rho K^+` with `K = sum_z |z> (x) (1_A (x) sqrt(R_z))` and `Z`
//! the pinching on the key register. Everything reduces to `dim(rho)`-sized
//! matrices: with `Q = K^+ K` and the polar form `K = U Q^{1/2}`, `G` is
//! unitarily equivalent to `Q^{1/2} rho Q^{1/2}` on its support, and `Z(G)`
//! is the direct sum of `B_z = S_z rho S_z` with `S_z = 1_A (x) sqrt(R_z)`.

use crate::error::{Error, Result};
use crate::linalg::{eigh, eigvals, from_spectrum, identity, kron, neg_entropy_bits, psd_sqrt, CMat};
use crate::regions::RegionOperators;

/// Eigenvalue floor applied before logarithms.
pub const EIG_FLOOR: f64 = 1e-12;

/// Dimension of Alice's register.
pub const ALICE_DIM: usize = 4;

/// Lifted Kraus blocks `S_z = 1_A (x) sqrt(R_z)`, `Q = sum_z S_z^2` and
/// `Q^{1/2}`.
#[derive(Debug, Clone)]
pub struct KeyMapKraus {
    pub s: [CMat; 4],
    pub q: CMat,
    pub q_half: CMat,
}

impl KeyMapKraus {
    pub fn new(regions: &RegionOperators) -> Self {
        let ia = identity(ALICE_DIM);
        let s: [CMat; 4] = std::array::from_fn(|z| kron(&ia, &regions.sqrt_r[z]));
        let q = s.iter().fold(CMat::zeros(s[0].nrows(), s[0].nrows()), |acc, sz| acc + sz * sz);
        let q_half = kron(&ia, &psd_sqrt(&(&regions.fock.identity() - &regions.r_perp)).expect("finite region operators"));
        Self { s, q, q_half }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }
}

fn check_state(rho: &CMat, kraus: &KeyMapKraus) -> Result<()> {
    if rho.nrows() != kraus.dim() || rho.ncols() != kraus.dim() {
        return Err(Error::InvalidArgument(format!(
            "state is {}x{}, key map acts on dimension {}",
            rho.nrows(),
            rho.ncols(),
            kraus.dim()
        )));
    }
    Ok(())
}

pub fn objective(rho: &CMat, kraus: &KeyMapKraus) -> Result<f64> {
    check_state(rho, kraus)?;
    let mut f = neg_entropy_bits(&eigvals(&(&kraus.q_half * rho * &kraus.q_half))?, EIG_FLOOR);
    for sz in &kraus.s {
        f -= neg_entropy_bits(&eigvals(&(sz * rho * sz))?, EIG_FLOOR);
    }
    if !f.is_finite() {
        return Err(Error::Numerical(format!("objective is {f}")));
    }
    Ok(f)
}

pub fn objective_and_gradient(rho: &CMat, kraus: &KeyMapKraus) -> Result<(f64, CMat)> {
    check_state(rho, kraus)?;
    let qh = &kraus.q_half;
    let (g_vals, g_vecs) = eigh(&(qh * rho * qh))?;
    let mut f = neg_entropy_bits(&g_vals, EIG_FLOOR);
    // K^+ log2(G) K = Q^{1/2} log2(Q^{1/2} rho Q^{1/2}) Q^{1/2}
    let logs: Vec<f64> = g_vals.iter().map(|&v| v.max(EIG_FLOOR).log2()).collect();
    let mut grad = qh * from_spectrum(&logs, &g_vecs) * qh;
    for sz in &kraus.s {
        let (b_vals, b_vecs) = eigh(&(sz * rho * sz))?;
        f -= neg_entropy_bits(&b_vals, EIG_FLOOR);
        let logs: Vec<f64> = b_vals.iter().map(|&v| v.max(EIG_FLOOR).log2()).collect();
        grad -= sz * from_spectrum(&logs, &b_vecs) * sz;
    }
    if !f.is_finite() {
        return Err(Error::Numerical(format!("objective is {f}; spectrum of G {g_vals:?}")));
    }
    Ok((f, crate::linalg::hermitize(&grad)))
}
