//! Dense Hermitian helpers on `DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `Re Tr(a b)`.
pub fn inner(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry before eigendecomposition".into()));
    }
    let e = SymmetricEigen::new(hermitize(m));
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals: Vec<f64> = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical(format!("NaN in spectrum: {vals:?}")));
    }
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    Ok((vals, vecs))
}

pub fn eigvals(m: &CMat) -> Result<Vec<f64>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry before eigendecomposition".into()));
    }
    let mut vals: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| v.is_nan()) {
        return Err(Error::Numerical(format!("NaN in spectrum: {vals:?}")));
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn min_eig(m: &CMat) -> Result<f64> {
    Ok(eigvals(m)?[0])
}

/// `V f(Lambda) V^+` for a Hermitian matrix.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    Ok(from_spectrum(&vals.iter().map(|&v| f(v)).collect::<Vec<_>>(), &vecs))
}

pub fn from_spectrum(vals: &[f64], vecs: &CMat) -> CMat {
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(v, 0.0)));
    let scaled = CMat::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, c)] * d[c]);
    scaled * vecs.adjoint()
}

/// Square root of a PSD matrix, clipping negative eigenvalues.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    herm_fn(m, |v| v.max(0.0).sqrt())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMat::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

/// `Tr_B` of an operator on `C^da (x) C^db`.
pub fn partial_trace_b(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

/// `|i><j| (x) op`.
pub fn block_embed(op: &CMat, da: usize, i: usize, j: usize) -> CMat {
    let db = op.nrows();
    let mut m = zeros(da * db);
    m.view_mut((i * db, j * db), (db, db)).copy_from(op);
    m
}

/// `sum_i x_i log2 x_i` over a spectrum; the logarithm sees eigenvalues
/// floored at `floor` and non-positive eigenvalues contribute nothing.
pub fn neg_entropy_bits(vals: &[f64], floor: f64) -> f64 {
    vals.iter().map(|&v| v.max(0.0) * v.max(floor).log2()).sum()
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}
