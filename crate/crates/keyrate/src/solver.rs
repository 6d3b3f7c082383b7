//! Frank-Wolfe minimisation of the key-map relative entropy and the
//! certified linearisation lower bound.

use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintSet, SdpLayout};
use crate::error::{Error, Result};
use crate::linalg::{identity, inner, trace_re, CMat};
use crate::objective::{objective, objective_and_gradient, KeyMapKraus};
use crate::sdp::{point_axpy, solve, Point, SdpSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FwSettings {
    /// Stop once the Frank-Wolfe gap falls below this (bits).
    pub tol: f64,
    pub max_iter: usize,
    pub line_search_iter: usize,
    pub sdp: SdpSettings,
}

impl Default for FwSettings {
    fn default() -> Self {
        Self { tol: 1e-4, max_iter: 300, line_search_iter: 28, sdp: SdpSettings::default() }
    }
}

#[derive(Debug, Clone)]
pub struct FwResult {
    pub rho_star: CMat,
    pub point: Point,
    pub upper_bound: f64,
    /// Objective value at every iterate.
    pub trace: Vec<f64>,
    pub gaps: Vec<f64>,
    pub converged: bool,
}

impl FwResult {
    pub fn final_gap(&self) -> f64 {
        self.gaps.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn linear_minimiser(layout: &SdpLayout, grad: &CMat, settings: &SdpSettings) -> Result<Point> {
    let sol = solve(&layout.with_rho_cost(grad), settings)?;
    if !sol.converged && sol.primal_infeasibility > 1e-6 {
        return Err(Error::Solver(format!(
            "linear subproblem ended with primal infeasibility {:.2e} after {} iterations (gap {:.2e}, dual infeasibility {:.2e})",
            sol.primal_infeasibility, sol.iterations, sol.relative_gap(), sol.dual_infeasibility
        )));
    }
    Ok(sol.x)
}

/// Golden-section search of `f((1 - t) rho + t s)` on `[0, 1]`.
fn line_search(rho: &CMat, dir: &CMat, kraus: &KeyMapKraus, iters: usize) -> Result<(f64, f64)> {
    let phi = |t: f64| objective(&(rho + dir.scale(t)), kraus);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (phi(c)?, phi(d)?);
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d)?;
        }
    }
    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    let f1 = phi(1.0)?;
    if f1 < best.1 {
        best = (1.0, f1);
    }
    Ok(best)
}

pub fn frank_wolfe(cs: &ConstraintSet, kraus: &KeyMapKraus, settings: &FwSettings) -> Result<FwResult> {
    if kraus.dim() != cs.dim() {
        return Err(Error::InvalidArgument("key map and constraint set dimensions differ".into()));
    }
    let layout = SdpLayout::new(cs);
    let mut x = layout.feasible_point(&settings.sdp)?;
    let rb = layout.rho_block;
    let mut trace = Vec::new();
    let mut gaps = Vec::new();
    let mut converged = false;
    let (mut f, mut grad) = objective_and_gradient(x[rb].dense(), kraus)?;
    trace.push(f);
    for it in 0..settings.max_iter {
        let s = linear_minimiser(&layout, &grad, &settings.sdp)?;
        let rho = x[rb].dense();
        let dir = s[rb].dense() - rho;
        let gap = -inner(&grad, &dir);
        gaps.push(gap);
        log::debug!("frank-wolfe iter {it}: f = {f:.8}, gap = {gap:.3e}");
        if gap < settings.tol {
            converged = true;
            break;
        }
        let (t, f_new) = line_search(rho, &dir, kraus, settings.line_search_iter)?;
        if !(f_new < f) {
            log::debug!("frank-wolfe line search made no progress at gap {gap:.3e}");
            break;
        }
        let step: Point = s.iter().zip(&x).map(|(s, x)| s.axpy(-1.0, x)).collect();
        x = point_axpy(&x, t, &step);
        (f, grad) = objective_and_gradient(x[rb].dense(), kraus)?;
        trace.push(f);
    }
    Ok(FwResult {
        rho_star: x[rb].dense().clone(),
        upper_bound: f,
        point: x,
        trace,
        gaps,
        converged,
    })
}

/// Mixing weight towards the maximally mixed state before linearising.
pub const LINEARISATION_MIXING: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    /// `f(rho_eps) - <grad, rho_eps>`.
    pub linearisation_offset: f64,
    /// Certified `min <grad, sigma>` over the feasible set.
    pub linear_bound: f64,
    pub subproblem_gap: f64,
}

/// `f(sigma) >= f(rho) + <grad f(rho), sigma - rho>` for every feasible
/// `sigma`; the minimum of the linear term is bounded through a dual vector
/// whose residual infeasibility is charged against the trace bound of each
/// block.
pub fn dual_lower_bound(rho_star: &CMat, cs: &ConstraintSet, kraus: &KeyMapKraus, settings: &SdpSettings) -> Result<LowerBound> {
    let d = rho_star.nrows();
    let tr = trace_re(rho_star).max(0.0);
    let rho = rho_star.scale(1.0 - LINEARISATION_MIXING) + identity(d).scale(LINEARISATION_MIXING * tr / d as f64);
    let (f, grad) = objective_and_gradient(&rho, kraus)?;
    let layout = SdpLayout::new(cs);
    let problem = layout.with_rho_cost(&grad);
    let sol = solve(&problem, settings)?;
    let linear_bound = layout.certified_bound(&problem, &sol.y)?;
    let offset = f - inner(&grad, &rho);
    Ok(LowerBound {
        value: offset + linear_bound,
        linearisation_offset: offset,
        linear_bound,
        subproblem_gap: sol.relative_gap(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyBound {
    pub lower: f64,
    pub upper: f64,
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Frank-Wolfe followed by the certified lower bound; the lower bound is
/// clipped to be no larger than the upper bound.
pub fn entropy_bound(cs: &ConstraintSet, kraus: &KeyMapKraus, settings: &FwSettings) -> Result<EntropyBound> {
    let fw = frank_wolfe(cs, kraus, settings)?;
    let lb = dual_lower_bound(&fw.rho_star, cs, kraus, &settings.sdp)?;
    Ok(EntropyBound {
        lower: lb.value.min(fw.upper_bound),
        upper: fw.upper_bound,
        fw_gap: fw.final_gap(),
        iterations: fw.trace.len() - 1,
        converged: fw.converged,
    })
}
