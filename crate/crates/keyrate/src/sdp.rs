//! Primal-dual interior-point solver for block-diagonal complex Hermitian
//! SDPs (HKM direction, Mehrotra predictor-corrector).
//!
//! Primal: `min <C, X>` s.t. `<A_i, X> = b_i`, `X >= 0`.
//! Dual: `max b^T y` s.t. `sum_i y_i A_i + Z = C`, `Z >= 0`.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvals, hermitize, inner, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    Dense(usize),
    Diag(usize),
}

impl BlockKind {
    pub fn size(&self) -> usize {
        match *self {
            BlockKind::Dense(n) | BlockKind::Diag(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Dense(CMat),
    Diag(Vec<f64>),
}

impl Block {
    pub fn zeros(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Dense(n) => Block::Dense(CMat::zeros(n, n)),
            BlockKind::Diag(n) => Block::Diag(vec![0.0; n]),
        }
    }

    pub fn identity(kind: BlockKind, scale: f64) -> Self {
        match kind {
            BlockKind::Dense(n) => Block::Dense(CMat::identity(n, n).scale(scale)),
            BlockKind::Diag(n) => Block::Diag(vec![scale; n]),
        }
    }

    pub fn dense(&self) -> &CMat {
        match self {
            Block::Dense(m) => m,
            Block::Diag(_) => panic!("diagonal block where a dense block was expected"),
        }
    }

    pub fn diag(&self) -> &[f64] {
        match self {
            Block::Diag(v) => v,
            Block::Dense(_) => panic!("dense block where a diagonal block was expected"),
        }
    }

    pub fn inner(&self, other: &Block) -> f64 {
        match (self, other) {
            (Block::Dense(a), Block::Dense(b)) => inner(a, b),
            (Block::Diag(a), Block::Diag(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            _ => panic!("block kinds differ"),
        }
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// `self + t other`.
    pub fn axpy(&self, t: f64, other: &Block) -> Block {
        match (self, other) {
            (Block::Dense(a), Block::Dense(b)) => Block::Dense(a + b.scale(t)),
            (Block::Diag(a), Block::Diag(b)) => Block::Diag(a.iter().zip(b).map(|(x, y)| x + t * y).collect()),
            _ => panic!("block kinds differ"),
        }
    }
}

pub type Point = Vec<Block>;

pub fn point_inner(a: &[Block], b: &[Block]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

pub fn point_axpy(a: &[Block], t: f64, b: &[Block]) -> Point {
    a.iter().zip(b).map(|(x, y)| x.axpy(t, y)).collect()
}

/// Sparse Hermitian coefficient on one block. For dense blocks both
/// `(r, c, v)` and `(c, r, conj v)` must be listed; for diagonal blocks only
/// `r == c` entries with real values are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub block: usize,
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl Term {
    /// All non-zero entries of a dense Hermitian matrix.
    pub fn from_dense(block: usize, m: &CMat, drop_below: f64) -> Self {
        let mut entries = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)].norm() > drop_below {
                    entries.push((r, c, m[(r, c)]));
                }
            }
        }
        Self { block, entries }
    }

    pub fn diag(block: usize, entries: &[(usize, f64)]) -> Self {
        Self { block, entries: entries.iter().map(|&(i, v)| (i, i, Complex64::new(v, 0.0))).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn apply(&self, x: &[Block]) -> f64 {
        let mut s = 0.0;
        for t in &self.terms {
            match &x[t.block] {
                Block::Dense(m) => {
                    for &(r, c, v) in &t.entries {
                        s += (v * m[(c, r)]).re;
                    }
                }
                Block::Diag(d) => {
                    for &(r, _, v) in &t.entries {
                        s += v.re * d[r];
                    }
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub kinds: Vec<BlockKind>,
    pub cost: Vec<Block>,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 120, step_fraction: 0.98 }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: Point,
    pub y: Vec<f64>,
    pub z: Point,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
            / (1.0 + self.primal_objective.abs() + self.dual_objective.abs())
    }
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        if self.cost.len() != self.kinds.len() {
            return Err(Error::InvalidArgument("cost has wrong number of blocks".into()));
        }
        for (k, (kind, c)) in self.kinds.iter().zip(&self.cost).enumerate() {
            let ok = match (kind, c) {
                (BlockKind::Dense(n), Block::Dense(m)) => m.nrows() == *n && m.ncols() == *n,
                (BlockKind::Diag(n), Block::Diag(v)) => v.len() == *n,
                _ => false,
            };
            if !ok {
                return Err(Error::InvalidArgument(format!("cost block {k} does not match its kind")));
            }
        }
        for (i, con) in self.constraints.iter().enumerate() {
            for t in &con.terms {
                let Some(kind) = self.kinds.get(t.block) else {
                    return Err(Error::InvalidArgument(format!("constraint {i} names block {}", t.block)));
                };
                let n = kind.size();
                if t.entries.iter().any(|&(r, c, _)| r >= n || c >= n) {
                    return Err(Error::InvalidArgument(format!("constraint {i} indexes outside block {}", t.block)));
                }
                if matches!(kind, BlockKind::Diag(_)) && t.entries.iter().any(|&(r, c, v)| r != c || v.im != 0.0) {
                    return Err(Error::InvalidArgument(format!("constraint {i} has off-diagonal LP entries")));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.constraints.len()
    }

    pub fn apply(&self, x: &[Block]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.apply(x)).collect()
    }

    /// `sum_i y_i A_i`.
    pub fn adjoint(&self, y: &[f64]) -> Point {
        let mut out: Point = self.kinds.iter().map(|&k| Block::zeros(k)).collect();
        for (con, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for t in &con.terms {
                match &mut out[t.block] {
                    Block::Dense(m) => {
                        for &(r, c, v) in &t.entries {
                            m[(r, c)] += v * yi;
                        }
                    }
                    Block::Diag(d) => {
                        for &(r, _, v) in &t.entries {
                            d[r] += v.re * yi;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn objective(&self, x: &[Block]) -> f64 {
        point_inner(&self.cost, x)
    }
}

fn hermitian_inverse(m: &CMat) -> Result<CMat> {
    Cholesky::new(m.clone())
        .map(|c| hermitize(&c.inverse()))
        .ok_or_else(|| Error::Solver("lost positive definiteness".into()))
}

/// Largest `a` with `x + a dx >= 0` (infinite if unbounded).
fn max_step(x: &Block, dx: &Block) -> Result<f64> {
    match (x, dx) {
        (Block::Dense(x), Block::Dense(dx)) => {
            let l = Cholesky::new(x.clone()).ok_or_else(|| Error::Solver("iterate left the cone".into()))?.l();
            let li = l
                .solve_lower_triangular(&CMat::identity(x.nrows(), x.nrows()))
                .ok_or_else(|| Error::Solver("singular Cholesky factor".into()))?;
            let lam = eigvals(&(&li * dx * li.adjoint()))?[0];
            Ok(if lam < 0.0 { -1.0 / lam } else { f64::INFINITY })
        }
        (Block::Diag(x), Block::Diag(dx)) => Ok(x
            .iter()
            .zip(dx)
            .filter(|(_, d)| **d < 0.0)
            .map(|(x, d)| -x / d)
            .fold(f64::INFINITY, f64::min)),
        _ => Err(Error::Solver("block kinds differ".into())),
    }
}

struct Newton {
    chol: Cholesky<f64, nalgebra::Dyn>,
    zinv: Vec<Block>,
}

impl SdpProblem {
    fn schur(&self, x: &[Block], zinv: &[Block]) -> Result<DMatrix<f64>> {
        let m = self.m();
        let mut schur = DMatrix::zeros(m, m);
        for (k, kind) in self.kinds.iter().enumerate() {
            let users: Vec<(usize, &Term)> = self
                .constraints
                .iter()
                .enumerate()
                .flat_map(|(i, c)| c.terms.iter().filter(move |t| t.block == k).map(move |t| (i, t)))
                .collect();
            match kind {
                BlockKind::Dense(n) => {
                    let xk = x[k].dense();
                    let zk = zinv[k].dense();
                    for &(j, tj) in &users {
                        let mut xa = CMat::zeros(*n, *n);
                        for &(r, c, v) in &tj.entries {
                            for row in 0..*n {
                                xa[(row, c)] += xk[(row, r)] * v;
                            }
                        }
                        let t = xa * zk;
                        for &(i, ti) in &users {
                            let s: f64 = ti.entries.iter().map(|&(r, c, v)| (v * t[(c, r)]).re).sum();
                            schur[(i, j)] += s;
                        }
                    }
                }
                BlockKind::Diag(_) => {
                    let xk = x[k].diag();
                    let zk = zinv[k].diag();
                    for &(i, ti) in &users {
                        for &(j, tj) in &users {
                            let mut s = 0.0;
                            for &(r, _, v) in &ti.entries {
                                for &(r2, _, u) in &tj.entries {
                                    if r == r2 {
                                        s += v.re * u.re * xk[r] * zk[r];
                                    }
                                }
                            }
                            schur[(i, j)] += s;
                        }
                    }
                }
            }
        }
        Ok((&schur + schur.transpose()) * 0.5)
    }

    fn factor(&self, x: &[Block], z: &[Block]) -> Result<Newton> {
        let zinv: Vec<Block> = z
            .iter()
            .map(|b| match b {
                Block::Dense(m) => hermitian_inverse(m).map(Block::Dense),
                Block::Diag(d) => Ok(Block::Diag(d.iter().map(|v| 1.0 / v).collect())),
            })
            .collect::<Result<_>>()?;
        let mut schur = self.schur(x, &zinv)?;
        let scale = (0..schur.nrows()).map(|i| schur[(i, i)]).fold(0.0, f64::max).max(1e-300);
        let mut reg = 0.0;
        loop {
            if let Some(chol) = Cholesky::new(schur.clone()) {
                return Ok(Newton { chol, zinv });
            }
            reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
            if reg > 1e-4 * scale {
                return Err(Error::Solver("Schur complement is not positive definite".into()));
            }
            for i in 0..schur.nrows() {
                schur[(i, i)] += reg;
            }
        }
    }

    /// HKM direction for `X Z -> target`, where `rc` is the block-wise
    /// complementarity residual `sigma mu I - X Z - (corrector)`.
    fn direction(
        &self,
        nt: &Newton,
        x: &[Block],
        rp: &[f64],
        rd: &[Block],
        rc: &[Block],
    ) -> Result<(Point, Vec<f64>, Point)> {
        // G = (Rc - X Rd) Z^{-1}
        let g: Vec<Block> = x
            .iter()
            .zip(rd)
            .zip(rc)
            .zip(&nt.zinv)
            .map(|(((x, rd), rc), zi)| match (x, rd, rc, zi) {
                (Block::Dense(x), Block::Dense(rd), Block::Dense(rc), Block::Dense(zi)) => {
                    Block::Dense(hermitize(&((rc - x * rd) * zi)))
                }
                (Block::Diag(x), Block::Diag(rd), Block::Diag(rc), Block::Diag(zi)) => {
                    Block::Diag((0..x.len()).map(|l| (rc[l] - x[l] * rd[l]) * zi[l]).collect())
                }
                _ => unreachable!("block kinds checked at validation"),
            })
            .collect();
        let ag = self.apply(&g);
        let rhs = DVector::from_iterator(rp.len(), rp.iter().zip(&ag).map(|(p, a)| p - a));
        let dy = nt.chol.solve(&rhs);
        let dy: Vec<f64> = dy.iter().copied().collect();
        let aty = self.adjoint(&dy);
        let dz: Point = rd.iter().zip(&aty).map(|(r, a)| r.axpy(-1.0, a)).collect();
        // dX = sym((Rc - X dZ) Z^{-1})
        let dx: Point = x
            .iter()
            .zip(&dz)
            .zip(rc)
            .zip(&nt.zinv)
            .map(|(((x, dz), rc), zi)| match (x, dz, rc, zi) {
                (Block::Dense(x), Block::Dense(dz), Block::Dense(rc), Block::Dense(zi)) => {
                    Block::Dense(hermitize(&((rc - x * dz) * zi)))
                }
                (Block::Diag(x), Block::Diag(dz), Block::Diag(rc), Block::Diag(zi)) => {
                    Block::Diag((0..x.len()).map(|l| (rc[l] - x[l] * dz[l]) * zi[l]).collect())
                }
                _ => unreachable!("block kinds checked at validation"),
            })
            .collect();
        Ok((dx, dy, dz))
    }
}

fn complementarity(x: &[Block], z: &[Block], sigma_mu: f64, corr: Option<(&[Block], &[Block])>) -> Point {
    x.iter()
        .zip(z)
        .enumerate()
        .map(|(k, (x, z))| match (x, z) {
            (Block::Dense(x), Block::Dense(z)) => {
                let n = x.nrows();
                let mut r = CMat::identity(n, n).scale(sigma_mu) - x * z;
                if let Some((dx, dz)) = corr {
                    r -= dx[k].dense() * dz[k].dense();
                }
                Block::Dense(r)
            }
            (Block::Diag(x), Block::Diag(z)) => Block::Diag(
                (0..x.len())
                    .map(|l| {
                        let c = corr.map_or(0.0, |(dx, dz)| dx[k].diag()[l] * dz[k].diag()[l]);
                        sigma_mu - x[l] * z[l] - c
                    })
                    .collect(),
            ),
            _ => unreachable!("block kinds checked at validation"),
        })
        .collect()
}

fn step_length(x: &[Block], dx: &[Block]) -> Result<f64> {
    let mut a = f64::INFINITY;
    for (x, d) in x.iter().zip(dx) {
        a = a.min(max_step(x, d)?);
    }
    Ok(a)
}

pub fn solve(p: &SdpProblem, s: &SdpSettings) -> Result<SdpSolution> {
    p.validate()?;
    let m = p.m();
    let n_total: usize = p.kinds.iter().map(|k| k.size()).sum();
    let b: Vec<f64> = p.constraints.iter().map(|c| c.rhs).collect();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c_norm = p.cost.iter().map(|c| c.norm()).sum::<f64>();

    // starting point scaled to the data
    let a_norms: Vec<Vec<f64>> = p
        .constraints
        .iter()
        .map(|c| {
            let mut per = vec![0.0; p.kinds.len()];
            for t in &c.terms {
                per[t.block] += t.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>();
            }
            per.into_iter().map(f64::sqrt).collect()
        })
        .collect();
    let mut x: Point = Vec::new();
    let mut z: Point = Vec::new();
    for (k, kind) in p.kinds.iter().enumerate() {
        let nk = (kind.size() as f64).sqrt();
        let mut xi = 10f64.max(nk);
        let mut eta = 10f64.max(nk).max(p.cost[k].norm());
        for (i, an) in a_norms.iter().enumerate() {
            xi = xi.max((1.0 + b[i].abs()) / (1.0 + an[k]));
            eta = eta.max(an[k]);
        }
        x.push(Block::identity(*kind, xi));
        z.push(Block::identity(*kind, eta));
    }
    let mut y = vec![0.0; m];

    let mut iterations = 0;
    let mut converged = false;
    let (mut pinf, mut dinf);
    // best iterate by max(pinf, dinf, gap); near-singular iterates can diverge
    let mut best: Option<(f64, Point, Vec<f64>, Point, f64, f64)> = None;
    loop {
        let ax = p.apply(&x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = p.adjoint(&y);
        let rd: Point = p.cost.iter().zip(&aty).zip(&z).map(|((c, a), z)| c.axpy(-1.0, a).axpy(-1.0, z)).collect();
        pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + b_norm);
        dinf = rd.iter().map(|r| r.norm()).sum::<f64>() / (1.0 + c_norm);
        let pobj = p.objective(&x);
        let dobj: f64 = b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        log::trace!("sdp iter {iterations}: pobj {pobj:.10e} dobj {dobj:.10e} pinf {pinf:.2e} dinf {dinf:.2e}");
        if pinf < s.tol && dinf < s.tol && gap < s.tol {
            converged = true;
            best = None;
            break;
        }
        let merit = pinf.max(dinf).max(gap);
        match &best {
            Some((bm, ..)) if merit >= *bm => {
                if merit > 1e4 * bm && *bm < 1e-4 {
                    log::debug!("sdp diverging at iteration {iterations}, keeping best iterate ({bm:.2e})");
                    break;
                }
            }
            _ => best = Some((merit, x.clone(), y.clone(), z.clone(), pinf, dinf)),
        }
        if iterations >= s.max_iter {
            break;
        }
        iterations += 1;

        let mu = point_inner(&x, &z) / n_total as f64;
        let nt = match p.factor(&x, &z) {
            Ok(nt) => nt,
            Err(e) => {
                log::debug!("sdp stopped at iteration {iterations}: {e}");
                break;
            }
        };
        let rc_aff = complementarity(&x, &z, 0.0, None);
        let (dx_a, _, dz_a) = p.direction(&nt, &x, &rp, &rd, &rc_aff)?;
        let ap = step_length(&x, &dx_a)?.min(1.0);
        let ad = step_length(&z, &dz_a)?.min(1.0);
        let mu_aff = point_inner(&point_axpy(&x, ap, &dx_a), &point_axpy(&z, ad, &dz_a)) / n_total as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let rc = complementarity(&x, &z, sigma * mu, Some((&dx_a, &dz_a)));
        let (dx, dy, dz) = p.direction(&nt, &x, &rp, &rd, &rc)?;
        let ap = (s.step_fraction * step_length(&x, &dx)?).min(1.0);
        let ad = (s.step_fraction * step_length(&z, &dz)?).min(1.0);
        x = point_axpy(&x, ap, &dx);
        z = point_axpy(&z, ad, &dz);
        for (y, d) in y.iter_mut().zip(&dy) {
            *y += ad * d;
        }
        if ap < 1e-12 && ad < 1e-12 {
            log::debug!("sdp stalled at iteration {iterations}");
            break;
        }
    }
    if let Some((_, bx, by, bz, bp, bd)) = best {
        (x, y, z, pinf, dinf) = (bx, by, bz, bp, bd);
    }
    let primal_objective = p.objective(&x);
    let dual_objective = b.iter().zip(&y).map(|(b, y)| b * y).sum();
    Ok(SdpSolution {
        x,
        y,
        z,
        primal_objective,
        dual_objective,
        primal_infeasibility: pinf,
        dual_infeasibility: dinf,
        iterations,
        converged,
    })
}
