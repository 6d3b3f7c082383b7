//! Truncated Fock space of one optical mode.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{real, CMat};

/// `ln k!` for `k < n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n.max(1)];
    for k in 1..n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Real matrix `d_{mk}(r) = <m|D(r)|k>` for `r >= 0`, `m, k < dim`.
///
/// `<m|D(r e^{i theta})|k> = e^{i (m - k) theta} d_{mk}(r)`.
pub fn displacement_radial(dim: usize, r: f64) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(dim, dim);
    if r == 0.0 {
        d.fill_with_identity();
        return d;
    }
    let lnf = ln_factorials(dim);
    let x = r * r;
    let ln_r = r.ln();
    for shift in 0..dim {
        let alpha = shift as f64;
        // L_k^{(shift)}(x) for k = 0..dim-shift by upward recurrence
        let len = dim - shift;
        let mut lag = vec![0.0; len];
        lag[0] = 1.0;
        if len > 1 {
            lag[1] = 1.0 + alpha - x;
        }
        for k in 1..len.saturating_sub(1) {
            let kf = k as f64;
            lag[k + 1] = ((2.0 * kf + 1.0 + alpha - x) * lag[k] - (kf + alpha) * lag[k - 1]) / (kf + 1.0);
        }
        for (k, l) in lag.iter().enumerate() {
            let m = k + shift;
            let mag = (0.5 * (lnf[k] - lnf[m]) + alpha * ln_r - 0.5 * x).exp() * l;
            d[(m, k)] = mag;
            if shift > 0 {
                d[(k, m)] = if shift % 2 == 0 { mag } else { -mag };
            }
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    pub n_c: usize,
}

impl FockSpace {
    pub fn new(n_c: usize) -> Self {
        Self { n_c }
    }

    pub fn dim(&self) -> usize {
        self.n_c + 1
    }

    /// Projector onto the cutoff space, i.e. the identity here.
    pub fn identity(&self) -> CMat {
        CMat::identity(self.dim(), self.dim())
    }

    pub fn annihilation(&self) -> CMat {
        let n = self.dim();
        CMat::from_fn(n, n, |r, c| if c == r + 1 { real((c as f64).sqrt()) } else { real(0.0) })
    }

    pub fn number(&self) -> CMat {
        let n = self.dim();
        CMat::from_diagonal(&DVector::from_fn(n, |i, _| real(i as f64)))
    }

    /// Cutoff block of the infinite-dimensional `D(beta)`.
    pub fn displacement(&self, beta: Complex64) -> CMat {
        let n = self.dim();
        let (r, theta) = beta.to_polar();
        let d = displacement_radial(n, r);
        CMat::from_fn(n, n, |m, k| Complex64::from_polar(d[(m, k)], (m as f64 - k as f64) * theta))
    }

    /// Cutoff coefficients `<n|alpha>` (not renormalised).
    pub fn coherent(&self, alpha: Complex64) -> DVector<Complex64> {
        let lnf = ln_factorials(self.dim());
        let pref = (-0.5 * alpha.norm_sqr()).exp();
        DVector::from_fn(self.dim(), |n, _| {
            if n == 0 {
                real(pref)
            } else {
                alpha.powu(n as u32) * (pref * (-0.5 * lnf[n]).exp())
            }
        })
    }

    /// `exp(i theta n)`.
    pub fn phase_rotation(&self, theta: f64) -> CMat {
        let n = self.dim();
        CMat::from_diagonal(&DVector::from_fn(n, |i, _| Complex64::from_polar(1.0, i as f64 * theta)))
    }

    /// Thermal state with mean photon number `nbar`, cut off.
    pub fn thermal(&self, nbar: f64) -> CMat {
        let n = self.dim();
        let q = nbar / (1.0 + nbar);
        CMat::from_diagonal(&DVector::from_fn(n, |i, _| real(q.powi(i as i32) / (1.0 + nbar))))
    }

    /// `Pi (a - beta)^+ (a - beta) Pi`, exact on the cutoff space.
    pub fn displaced_number(&self, beta: Complex64) -> CMat {
        let a = self.annihilation();
        let ad = a.adjoint();
        let mut m = self.number() - ad * beta - a * beta.conj();
        for i in 0..self.dim() {
            m[(i, i)] += real(beta.norm_sqr());
        }
        m
    }

    /// `Pi [(a - beta)^+ (a - beta)]^2 Pi`, squared on a padded space first.
    pub fn displaced_number_sq(&self, beta: Complex64) -> CMat {
        let padded = FockSpace::new(self.n_c + 2).displaced_number(beta);
        let sq = &padded * &padded;
        sq.view((0, 0), (self.dim(), self.dim())).into_owned()
    }
}
