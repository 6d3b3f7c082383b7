//! Source-replacement state of an honest thermal-loss link, cut off.

use cvqkd_core::protocol::coherent_overlap;
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fock::FockSpace;
use crate::linalg::{hermitize, CMat};
use crate::objective::ALICE_DIM;
use crate::quad::gauss_hermite;

/// Gauss-Hermite nodes per quadrature for the thermal-noise average.
pub const NOISE_NODES: usize = 24;

/// Cutoff block of `N_nbar(|a><b|)`, the additive Gaussian noise channel
/// with `<|gamma|^2> = nbar` applied to a coherent-state dyad.
pub fn noisy_dyad(fock: &FockSpace, a: Complex64, b: Complex64, nbar: f64) -> CMat {
    if nbar == 0.0 {
        return fock.coherent(a) * fock.coherent(b).adjoint();
    }
    let (x, w) = gauss_hermite(NOISE_NODES);
    let s = nbar.sqrt();
    let mut out = CMat::zeros(fock.dim(), fock.dim());
    for (xi, wi) in x.iter().zip(&w) {
        for (yi, wj) in x.iter().zip(&w) {
            let g = Complex64::new(s * xi, s * yi);
            // D(g)|a> = exp(i Im(g conj(a))) |a + g>
            let phase = Complex64::from_polar(1.0, (g * a.conj()).im - (g * b.conj()).im);
            let va = fock.coherent(a + g);
            let vb = fock.coherent(b + g);
            out += (va * vb.adjoint()) * (phase * (wi * wj / std::f64::consts::PI));
        }
    }
    out
}

/// `sum_jk sqrt(p_j p_k) |j><k| (x) Pi E(|alpha_j><alpha_k|) Pi` for a channel
/// of transmittance `tau` followed by thermal noise of `nbar` photons.
pub fn honest_state(alpha: &[Complex64; 4], priors: [f64; 4], tau: f64, nbar: f64, n_c: usize) -> Result<CMat> {
    if !(tau > 0.0 && tau <= 1.0) || !(nbar >= 0.0) {
        return Err(invalid(format!("need tau in (0,1] and nbar >= 0, got {tau}, {nbar}")));
    }
    let fock = FockSpace::new(n_c);
    let dim = fock.dim();
    let mut rho = CMat::zeros(ALICE_DIM * dim, ALICE_DIM * dim);
    let lost = (1.0 - tau).sqrt();
    let kept = tau.sqrt();
    for j in 0..4 {
        for k in j..4 {
            // pure loss leaves the environment overlap on the off-diagonal
            let env = coherent_overlap(alpha[j] * lost, alpha[k] * lost);
            let blk = noisy_dyad(&fock, alpha[j] * kept, alpha[k] * kept, nbar) * (env * (priors[j] * priors[k]).sqrt());
            rho.view_mut((j * dim, k * dim), (dim, dim)).copy_from(&blk);
            if k != j {
                rho.view_mut((k * dim, j * dim), (dim, dim)).copy_from(&blk.adjoint());
            }
        }
    }
    Ok(hermitize(&rho))
}
