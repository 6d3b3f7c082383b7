//! Feasible set of the entropy minimisation and its SDP form.

use cvqkd_core::stats::{AcceptanceSet, Observable};
use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::FockSpace;
use crate::linalg::{block_embed, eigvals, inner, partial_trace_b, trace_re, CMat};
use crate::objective::ALICE_DIM;
use crate::sdp::{solve, Block, BlockKind, LinearConstraint, Point, SdpProblem, SdpSettings, Term};

/// How acceptance intervals are transcribed into constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMode {
    /// `<X> - t - mu - w ||X|| <= Tr[.] <= <X> + t + mu`.
    #[default]
    Canonical,
    /// `<X> + mu - w ||X|| <= Tr[.] <= <X> - mu`, which is empty unless
    /// `2 mu <= w ||X||`.
    Verbatim,
}

/// Bounds `lo <= Tr[(|j><j| (x) X) rho] <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableBound {
    pub symbol: usize,
    pub observable: Observable,
    pub operator: CMat,
    pub lo: f64,
    pub hi: f64,
}

impl ObservableBound {
    pub fn lifted(&self) -> CMat {
        block_embed(&self.operator, ALICE_DIM, self.symbol, self.symbol)
    }

    pub fn value(&self, rho: &CMat) -> f64 {
        let dim = self.operator.nrows();
        let blk = rho.view((self.symbol * dim, self.symbol * dim), (dim, dim)).into_owned();
        inner(&self.operator, &blk)
    }
}

#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub fock: FockSpace,
    pub rho_a: CMat,
    pub w: f64,
    pub bounds: Vec<ObservableBound>,
}

/// Cutoff operator for an observable displaced by `beta`.
pub fn observable_operator(fock: &FockSpace, obs: Observable, beta: Complex64) -> CMat {
    match obs {
        Observable::N => fock.displaced_number(beta),
        Observable::N2 => fock.displaced_number_sq(beta),
    }
}

impl ConstraintSet {
    pub fn new(fock: FockSpace, rho_a: CMat, w: f64, bounds: Vec<ObservableBound>) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(invalid(format!("weight w must lie in [0, 1], got {w}")));
        }
        if rho_a.nrows() != ALICE_DIM || rho_a.ncols() != ALICE_DIM {
            return Err(invalid("Alice's reduced state must be 4x4"));
        }
        if (trace_re(&rho_a) - 1.0).abs() > 1e-9 || eigvals(&rho_a)?[0] < -1e-12 {
            return Err(invalid("Alice's reduced state must be a density matrix"));
        }
        for b in &bounds {
            if !(b.lo.is_finite() && b.hi.is_finite()) || b.lo > b.hi {
                return Err(invalid(format!(
                    "empty or unbounded interval [{}, {}] for symbol {} {}",
                    b.lo, b.hi, b.symbol, b.observable
                )));
            }
            if b.symbol >= ALICE_DIM || b.operator.nrows() != fock.dim() {
                return Err(invalid("observable bound does not match the cutoff space"));
            }
        }
        Ok(Self { fock, rho_a, w, bounds })
    }

    /// Transcribes an acceptance set; bounds are weighted by the priors.
    pub fn from_acceptance(
        set: &AcceptanceSet,
        rho_a: &Matrix4<Complex64>,
        priors: [f64; 4],
        n_c: usize,
        mode: IntervalMode,
    ) -> Result<Self> {
        let fock = FockSpace::new(n_c);
        let mut bounds = Vec::with_capacity(set.entries.len());
        for e in &set.entries {
            let norm = match e.observable {
                Observable::N => set.norms.0,
                Observable::N2 => set.norms.1,
            };
            let (lo, hi) = match mode {
                IntervalMode::Canonical => (e.lo, e.hi),
                IntervalMode::Verbatim => (e.expected + e.mu - set.w * norm, e.expected - e.mu),
            };
            let p = priors[e.symbol];
            bounds.push(ObservableBound {
                symbol: e.symbol,
                observable: e.observable,
                operator: observable_operator(&fock, e.observable, set.beta[e.symbol]),
                lo: p * lo,
                hi: p * hi,
            });
        }
        let rho_a = CMat::from_fn(4, 4, |r, c| rho_a[(r, c)]);
        Self::new(fock, rho_a, set.w, bounds)
    }

    /// Zero-width intervals through the values of `state`, `w = 0`.
    pub fn point_like(state: &CMat, beta: &[Complex64; 4], n_c: usize) -> Result<Self> {
        Self::around(state, beta, n_c, 0.0)
    }

    /// Intervals of half-width `width` (relative to each value, absolute for
    /// zero values) around the values of `state`, `w = 0`.
    pub fn around(state: &CMat, beta: &[Complex64; 4], n_c: usize, width: f64) -> Result<Self> {
        let fock = FockSpace::new(n_c);
        let mut bounds = Vec::new();
        for (j, &b) in beta.iter().enumerate() {
            for obs in [Observable::N, Observable::N2] {
                let mut bound =
                    ObservableBound { symbol: j, observable: obs, operator: observable_operator(&fock, obs, b), lo: 0.0, hi: 0.0 };
                let v = bound.value(state);
                let h = width * v.abs().max(1e-3);
                bound.lo = v - h;
                bound.hi = v + h;
                bounds.push(bound);
            }
        }
        let rho_a = partial_trace_b(state, ALICE_DIM, fock.dim());
        let t = trace_re(&rho_a);
        Self::new(fock, rho_a.unscale(t), 0.0, bounds)
    }

    /// Every interval widened by `by` on both sides.
    pub fn widened(&self, by: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.bounds {
            b.lo -= by;
            b.hi += by;
        }
        out
    }

    pub fn dim(&self) -> usize {
        ALICE_DIM * self.fock.dim()
    }

    /// Largest violation of any constraint by `rho`, taking the best `P, N`
    /// for the partial-trace condition.
    pub fn max_violation(&self, rho: &CMat) -> Result<f64> {
        let mut worst: f64 = 0.0;
        worst = worst.max(-eigvals(rho)?[0]);
        let tr = trace_re(rho);
        worst = worst.max(tr - 1.0).max(1.0 - self.w - tr);
        let diff = partial_trace_b(rho, ALICE_DIM, self.fock.dim()) - &self.rho_a;
        let trace_norm: f64 = eigvals(&diff)?.iter().map(|v| v.abs()).sum();
        worst = worst.max(trace_norm - 2.0 * self.w.sqrt());
        for b in &self.bounds {
            let v = b.value(rho);
            worst = worst.max(b.lo - v).max(v - b.hi);
        }
        Ok(worst)
    }
}

/// Hermitian basis of 4x4 matrices, orthonormal in `Re Tr(A B)`.
fn hermitian_basis() -> Vec<CMat> {
    let mut out = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..ALICE_DIM {
        for b in a..ALICE_DIM {
            let mut m = CMat::zeros(ALICE_DIM, ALICE_DIM);
            if a == b {
                m[(a, a)] = Complex64::new(1.0, 0.0);
                out.push(m);
            } else {
                m[(a, b)] = Complex64::new(s, 0.0);
                m[(b, a)] = Complex64::new(s, 0.0);
                out.push(m.clone());
                m[(a, b)] = Complex64::new(0.0, -s);
                m[(b, a)] = Complex64::new(0.0, s);
                out.push(m);
            }
        }
    }
    out
}

/// Standard-form SDP over `(rho, P, N, slacks)` with an upper bound on the
/// trace of every block (per entry for the slack block).
#[derive(Debug, Clone)]
pub struct SdpLayout {
    pub problem: SdpProblem,
    pub trace_bounds: Vec<Vec<f64>>,
    pub rho_block: usize,
}

impl SdpLayout {
    pub fn new(cs: &ConstraintSet) -> Self {
        let d = cs.dim();
        let db = cs.fock.dim();
        let use_pn = cs.w > 0.0;
        let mut kinds = vec![BlockKind::Dense(d)];
        let mut trace_bounds = vec![vec![1.0]];
        let (p_blk, n_blk) = if use_pn {
            kinds.push(BlockKind::Dense(ALICE_DIM));
            kinds.push(BlockKind::Dense(ALICE_DIM));
            trace_bounds.push(vec![2.0 * cs.w.sqrt()]);
            trace_bounds.push(vec![2.0 * cs.w.sqrt()]);
            (1, 2)
        } else {
            (usize::MAX, usize::MAX)
        };
        let slack_blk = kinds.len();
        let mut slack_bounds: Vec<f64> = Vec::new();
        let mut constraints = Vec::new();
        let one = Complex64::new(1.0, 0.0);

        for h in hermitian_basis() {
            let mut rho_entries = Vec::new();
            for a in 0..ALICE_DIM {
                for b in 0..ALICE_DIM {
                    if h[(a, b)] != Complex64::new(0.0, 0.0) {
                        for k in 0..db {
                            rho_entries.push((a * db + k, b * db + k, h[(a, b)]));
                        }
                    }
                }
            }
            let mut terms = vec![Term { block: 0, entries: rho_entries }];
            if use_pn {
                terms.push(Term::from_dense(p_blk, &(-&h), 0.0));
                terms.push(Term::from_dense(n_blk, &h, 0.0));
            }
            constraints.push(LinearConstraint { terms, rhs: inner(&h, &cs.rho_a) });
        }
        let trace_rho = Term { block: 0, entries: (0..d).map(|i| (i, i, one)).collect() };
        if use_pn {
            let tr4 = |blk| Term { block: blk, entries: (0..ALICE_DIM).map(|i| (i, i, one)).collect() };
            let s0 = slack_bounds.len();
            slack_bounds.extend([2.0 * cs.w.sqrt(), cs.w, cs.w]);
            constraints.push(LinearConstraint {
                terms: vec![tr4(p_blk), tr4(n_blk), Term::diag(slack_blk, &[(s0, 1.0)])],
                rhs: 2.0 * cs.w.sqrt(),
            });
            constraints.push(LinearConstraint {
                terms: vec![trace_rho.clone(), Term::diag(slack_blk, &[(s0 + 1, -1.0)])],
                rhs: 1.0 - cs.w,
            });
            constraints.push(LinearConstraint {
                terms: vec![trace_rho.clone(), Term::diag(slack_blk, &[(s0 + 2, 1.0)])],
                rhs: 1.0,
            });
        }
        for b in &cs.bounds {
            let scale = 1.0 / b.operator.iter().map(|z| z.norm()).fold(1e-300, f64::max);
            let off = b.symbol * db;
            let mut entries = Vec::new();
            for r in 0..db {
                for c in 0..db {
                    let v = b.operator[(r, c)];
                    if v.norm() > 0.0 {
                        entries.push((off + r, off + c, v * scale));
                    }
                }
            }
            let width = b.hi - b.lo;
            if width <= 0.0 {
                constraints.push(LinearConstraint { terms: vec![Term { block: 0, entries }], rhs: b.lo * scale });
            } else {
                let s0 = slack_bounds.len();
                slack_bounds.extend([width, width]);
                constraints.push(LinearConstraint {
                    terms: vec![Term { block: 0, entries }, Term::diag(slack_blk, &[(s0, -scale)])],
                    rhs: b.lo * scale,
                });
                constraints.push(LinearConstraint {
                    terms: vec![Term::diag(slack_blk, &[(s0, 1.0 / width), (s0 + 1, 1.0 / width)])],
                    rhs: 1.0,
                });
            }
        }
        if !slack_bounds.is_empty() {
            kinds.push(BlockKind::Diag(slack_bounds.len()));
            trace_bounds.push(slack_bounds);
        }
        let cost = kinds.iter().map(|&k| Block::zeros(k)).collect();
        Self { problem: SdpProblem { kinds, cost, constraints }, trace_bounds, rho_block: 0 }
    }

    pub fn with_rho_cost(&self, c: &CMat) -> SdpProblem {
        let mut p = self.problem.clone();
        p.cost[self.rho_block] = Block::Dense(c.clone());
        p
    }

    /// `b^T y + sum_k min(0, lambda_min(C_k - A_k^* y)) tau_k`, a lower bound
    /// on `min <C, X>` over the exact feasible set for any `y`.
    pub fn certified_bound(&self, p: &SdpProblem, y: &[f64]) -> Result<f64> {
        let mut bound: f64 = p.constraints.iter().zip(y).map(|(c, y)| c.rhs * y).sum();
        let aty = p.adjoint(y);
        for (k, (c, a)) in p.cost.iter().zip(&aty).enumerate() {
            match c.axpy(-1.0, a) {
                Block::Dense(s) => bound += eigvals(&s)?[0].min(0.0) * self.trace_bounds[k][0],
                Block::Diag(s) => {
                    bound += s.iter().zip(&self.trace_bounds[k]).map(|(v, t)| v.min(0.0) * t).sum::<f64>()
                }
            }
        }
        Ok(bound)
    }

    /// Elastic phase-one solve. Returns a point near the analytic centre of
    /// the feasible set, or an infeasibility certificate.
    pub fn feasible_point(&self, settings: &SdpSettings) -> Result<Point> {
        let m = self.problem.m();
        let mut p = self.problem.clone();
        let elastic = p.kinds.len();
        p.kinds.push(BlockKind::Diag(2 * m));
        p.cost.push(Block::Diag(vec![1.0; 2 * m]));
        for (i, c) in p.constraints.iter_mut().enumerate() {
            c.terms.push(Term::diag(elastic, &[(2 * i, 1.0), (2 * i + 1, -1.0)]));
        }
        let sol = solve(&p, settings)?;
        if !sol.converged {
            log::warn!("phase-one solve stopped after {} iterations, gap {:.2e}", sol.iterations, sol.relative_gap());
        }
        if sol.dual_objective > FEASIBILITY_TOL {
            return Err(Error::Infeasible { certificate: sol.dual_objective });
        }
        if sol.primal_objective > FEASIBILITY_TOL {
            return Err(Error::Solver(format!(
                "phase-one objective {:.3e} without an infeasibility certificate",
                sol.primal_objective
            )));
        }
        let mut x = sol.x;
        x.truncate(elastic);
        Ok(x)
    }
}

/// Total elastic violation accepted as feasible (data are row-scaled).
pub const FEASIBILITY_TOL: f64 = 1e-7;
