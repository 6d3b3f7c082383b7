//! Key-map region operators `R_z = (1/pi) int_{A_z} E(zeta) d^2 zeta` on the
//! cutoff space.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::{displacement_radial, FockSpace};
use crate::linalg::{psd_sqrt, CMat};
use crate::quad::integrate_vec;

/// Radial quadrature tolerance per matrix element.
pub const RADIAL_TOL: f64 = 1e-12;

/// How the outcome `zeta` relates to the state the bound is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DetectorMode {
    /// Ideal heterodyne on the detector-plane state.
    Ideal,
    /// Heterodyne after loss `eta` and Gaussian noise `nu_el` (SNU) on the
    /// channel-output state.
    Trusted { eta: f64, nu_el: f64 },
}

impl DetectorMode {
    /// Thermal occupation of the effective POVM and scale of `zeta`.
    fn povm_parameters(&self) -> Result<(f64, f64)> {
        match *self {
            DetectorMode::Ideal => Ok((0.0, 1.0)),
            DetectorMode::Trusted { eta, nu_el } => {
                if !(eta > 0.0 && eta <= 1.0) || !(nu_el >= 0.0) {
                    return Err(invalid(format!("trusted detector needs eta in (0,1], nu_el >= 0; got {eta}, {nu_el}")));
                }
                Ok(((1.0 - eta + nu_el) / eta, eta))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RegionOperators {
    pub m_range: f64,
    pub delta_r: f64,
    pub fock: FockSpace,
    pub mode: DetectorMode,
    pub r: [CMat; 4],
    pub r_perp: CMat,
    pub sqrt_r: [CMat; 4],
}

/// `int_{z pi/2}^{(z+1) pi/2} e^{i k theta} d theta`.
fn quadrant_angular(z: usize, k: i64) -> Complex64 {
    let t0 = z as f64 * FRAC_PI_2;
    if k == 0 {
        return Complex64::new(FRAC_PI_2, 0.0);
    }
    let kf = k as f64;
    (Complex64::from_polar(1.0, kf * (t0 + FRAC_PI_2)) - Complex64::from_polar(1.0, kf * t0)) / Complex64::new(0.0, kf)
}

/// Number of thermal terms kept so the dropped weight is below 1e-17.
fn thermal_terms(nbar: f64) -> usize {
    if nbar == 0.0 {
        return 1;
    }
    let q = nbar / (1.0 + nbar);
    ((1e-17f64).ln() / q.ln()).ceil() as usize + 1
}

/// Radial integrals `int r sum_k p_k d_mk(r) d_nk(r) dr`, packed lower
/// triangle, for the displaced-thermal POVM kernel.
fn radial_matrix(dim: usize, nbar: f64, a: f64, b: f64) -> Result<Vec<f64>> {
    let kmax = thermal_terms(nbar);
    let p: Vec<f64> = (0..kmax).map(|k| (nbar / (1.0 + nbar)).powi(k as i32) / (1.0 + nbar)).collect();
    let size = dim.max(kmax);
    let len = dim * (dim + 1) / 2;
    // integrand is below e^-60 beyond this radius
    let r_cap = ((dim + kmax) as f64).sqrt() + 11.0;
    let b = b.min(r_cap);
    if a >= b {
        return Ok(vec![0.0; len]);
    }
    let f = |r: f64| {
        let d = displacement_radial(size, r);
        let mut out = Vec::with_capacity(len);
        for m in 0..dim {
            for n in 0..=m {
                let s: f64 = (0..kmax).map(|k| p[k] * d[(m, k)] * d[(n, k)]).sum();
                out.push(r * s);
            }
        }
        out
    };
    integrate_vec(f, len, a, b, RADIAL_TOL, 0.0)
}

/// Builds `R_0..R_3` (quadrants in rotation order starting at the first
/// quadrant) and `R_perp = Pi - sum_z R_z`.
pub fn region_operators(m_range: f64, delta_r: f64, n_c: usize, mode: DetectorMode) -> Result<RegionOperators> {
    if !(delta_r >= 0.0) || !(m_range > delta_r) {
        return Err(invalid(format!("need M > delta_r >= 0, got M = {m_range}, delta_r = {delta_r}")));
    }
    let (nbar, scale) = mode.povm_parameters()?;
    let fock = FockSpace::new(n_c);
    let dim = fock.dim();
    let s = scale.sqrt();
    let rad = radial_matrix(dim, nbar, delta_r / s, m_range / s)?;
    let packed = |m: usize, n: usize| if m >= n { rad[m * (m + 1) / 2 + n] } else { rad[n * (n + 1) / 2 + m] };
    let r: [CMat; 4] = std::array::from_fn(|z| {
        CMat::from_fn(dim, dim, |m, n| quadrant_angular(z, m as i64 - n as i64) * (packed(m, n) / PI))
    });
    let mut r_perp = fock.identity();
    for rz in &r {
        r_perp -= rz;
    }
    let sqrt_r = [psd_sqrt(&r[0])?, psd_sqrt(&r[1])?, psd_sqrt(&r[2])?, psd_sqrt(&r[3])?];
    Ok(RegionOperators { m_range, delta_r, fock, mode, r, r_perp, sqrt_r })
}

impl RegionOperators {
    pub fn dim(&self) -> usize {
        self.fock.dim()
    }

    /// Probability of each key value and of discarding for a state of the
    /// signal mode.
    pub fn outcome_probabilities(&self, rho_b: &CMat) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (z, rz) in self.r.iter().enumerate() {
            out[z] = crate::linalg::inner(rz, rho_b);
        }
        out[4] = crate::linalg::inner(&self.r_perp, rho_b);
        out
    }
}
