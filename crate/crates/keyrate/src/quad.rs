//! Adaptive Gauss-Kronrod integration and Gauss-Hermite rules.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_INTERVALS: usize = 4000;

/// Globally adaptive G7-K15 quadrature; stops when the summed error estimate
/// is below `max(abs_tol, rel_tol |I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    integrate_vec(|x| vec![f(x)], 1, a, b, abs_tol, rel_tol).map(|v| v[0])
}

fn kronrod15_vec(f: &impl Fn(f64) -> Vec<f64>, len: usize, a: f64, b: f64) -> (Vec<f64>, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k: Vec<f64> = fc.iter().map(|v| WGK[7] * v).collect();
    let mut g: Vec<f64> = fc.iter().map(|v| WG[3] * v).collect();
    for i in 0..7 {
        let x = h * XGK[i];
        let (lo, hi) = (f(c - x), f(c + x));
        for t in 0..len {
            let s = lo[t] + hi[t];
            k[t] += WGK[i] * s;
            if i % 2 == 1 {
                g[t] += WG[i / 2] * s;
            }
        }
    }
    let err = k.iter().zip(&g).map(|(k, g)| ((k - g) * h).abs()).fold(0.0, f64::max);
    (k.into_iter().map(|v| v * h).collect(), err)
}

/// Vector-valued variant sharing nodes across components; the error is the
/// largest component error and the relative tolerance refers to the largest
/// component magnitude.
pub fn integrate_vec(
    f: impl Fn(f64) -> Vec<f64>,
    len: usize,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    if a == b {
        return Ok(vec![0.0; len]);
    }
    let mut parts = vec![{
        let (v, e) = kronrod15_vec(&f, len, a, b);
        (a, b, v, e)
    }];
    loop {
        let mut total = vec![0.0; len];
        for p in &parts {
            for (t, v) in total.iter_mut().zip(&p.2) {
                *t += v;
            }
        }
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !scale.is_finite() || !err.is_finite() {
            return Err(Error::QuadratureNonConvergence { a, b, estimate: err });
        }
        if err <= abs_tol.max(rel_tol * scale) {
            return Ok(total);
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNonConvergence { a, b, estimate: err });
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (v, e) = kronrod15_vec(&f, len, l, h);
            parts.push((l, h, v, e));
        }
    }
}

/// Nodes and weights for `int exp(-x^2) f(x) dx` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let e = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (e.eigenvalues[k], std::f64::consts::PI.sqrt() * e.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
