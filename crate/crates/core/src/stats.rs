//! Displaced photon-number estimators, energy test and acceptance test.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::records::SymbolRecord;

/// Neumaier-compensated sum; merges are order-insensitive to rounding level.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Where the displaced moments are referenced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EstimatorMode {
    /// Detector plane; the receiver is treated as ideal and all noise is
    /// attributed to the channel. Displacements `sqrt(T eta) alpha_j`.
    Ideal,
    /// Channel-output plane with the trusted receiver `(eta, nu_el)`
    /// deconvolved. Displacements `sqrt(T) alpha_j`.
    Trusted { nu_el: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats {
    pub mode: EstimatorMode,
    /// Displacement of each symbol class in the estimator's reference plane.
    pub beta: [Complex64; 4],
    pub mean_n_beta: [f64; 4],
    pub mean_n2_beta: [f64; 4],
    pub m: [usize; 4],
    pub ber_x: f64,
    pub ber_p: f64,
    #[serde(default)]
    pub i_t: f64,
}

impl ObservableStats {
    pub fn value(&self, symbol: usize, obs: Observable) -> f64 {
        match obs {
            Observable::N => self.mean_n_beta[symbol],
            Observable::N2 => self.mean_n2_beta[symbol],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Displaced photon number.
    N,
    /// Displaced squared photon number.
    N2,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::N => "n_beta",
            Observable::N2 => "n2_beta",
        })
    }
}

/// Bit decisions by sign: positive gives 0, negative gives 1, an exact zero
/// gives 0.
pub fn sign_bit(v: f64) -> u8 {
    u8::from(v < 0.0)
}

#[derive(Default, Clone, Copy)]
struct ClassAcc {
    count: usize,
    m1: CompensatedSum,
    m2: CompensatedSum,
    err_x: usize,
    err_p: usize,
}

impl ClassAcc {
    fn merge(mut self, o: Self) -> Self {
        self.count += o.count;
        self.m1 = self.m1.merge(o.m1);
        self.m2 = self.m2.merge(o.m2);
        self.err_x += o.err_x;
        self.err_p += o.err_p;
        self
    }
}

/// Displaced moments of the disclosed records.
///
/// `states` are Alice's prepared amplitudes, `transmittance` the channel
/// transmittance and `eta` the receiver efficiency. The detector-plane
/// displacement of class j is `sqrt(T eta) alpha_j`.
///
/// Ideal mode, with `u = |zeta - beta|^2`:
/// `<n> = E[u] - 1`, `<n^2> = E[u^2] - 3 E[u] + 1`.
///
/// Trusted mode undoes the receiver map on the moments of
/// `X = zeta - sqrt(T eta) alpha`. With `s = 1 - eta + nu_el`,
/// `E|v|^2 = (E|X|^2 - s) / eta` and
/// `E|v|^4 = (E|X|^4 - 4 s E|X|^2 + 2 s^2) / eta^2` are the heterodyne
/// moments an ideal receiver would see at the channel output, and the ideal
/// formulas are applied to them.
pub fn estimate_displaced_moments(
    records: &[SymbolRecord],
    states: &[Complex64; 4],
    transmittance: f64,
    eta: f64,
    mode: EstimatorMode,
) -> Result<ObservableStats> {
    if !(eta > 0.0 && eta <= 1.0) || !(transmittance > 0.0 && transmittance <= 1.0) {
        return Err(invalid(format!("transmittance {transmittance} and efficiency {eta} must lie in (0, 1]")));
    }
    let det_beta = states.map(|a| a * (transmittance * eta).sqrt());
    let signs = states.map(|a| (sign_bit(a.re), sign_bit(a.im)));
    let acc = records
        .par_iter()
        .filter(|r| r.disclosed)
        .fold(
            || [ClassAcc::default(); 4],
            |mut acc, r| {
                if let (Some(j), Some(z)) = (r.alice_symbol, r.zeta) {
                    let j = j as usize;
                    let u = (z - det_beta[j]).norm_sqr();
                    let a = &mut acc[j];
                    a.count += 1;
                    a.m1.add(u);
                    a.m2.add(u * u);
                    a.err_x += usize::from(sign_bit(z.re) != signs[j].0);
                    a.err_p += usize::from(sign_bit(z.im) != signs[j].1);
                }
                acc
            },
        )
        .reduce(|| [ClassAcc::default(); 4], |a, b| std::array::from_fn(|j| a[j].merge(b[j])));

    let mut mean_n = [0.0; 4];
    let mut mean_n2 = [0.0; 4];
    let mut m = [0usize; 4];
    for j in 0..4 {
        let a = acc[j];
        if a.count == 0 {
            return Err(Error::EmptySymbolClass(j));
        }
        let e1 = a.m1.value() / a.count as f64;
        let e2 = a.m2.value() / a.count as f64;
        let (v1, v2) = match mode {
            EstimatorMode::Ideal => (e1, e2),
            EstimatorMode::Trusted { nu_el } => {
                let s = 1.0 - eta + nu_el;
                ((e1 - s) / eta, (e2 - 4.0 * s * e1 + 2.0 * s * s) / (eta * eta))
            }
        };
        mean_n[j] = v1 - 1.0;
        mean_n2[j] = v2 - 3.0 * v1 + 1.0;
        m[j] = a.count;
        if mean_n[j] < 0.0 {
            log::warn!("symbol {j}: estimated <n_beta> = {:.3e} is unphysical", mean_n[j]);
        }
    }
    let total: usize = m.iter().sum();
    let beta = match mode {
        EstimatorMode::Ideal => det_beta,
        EstimatorMode::Trusted { .. } => states.map(|a| a * transmittance.sqrt()),
    };
    Ok(ObservableStats {
        mode,
        beta,
        mean_n_beta: mean_n,
        mean_n2_beta: mean_n2,
        m,
        ber_x: acc.iter().map(|a| a.err_x).sum::<usize>() as f64 / total as f64,
        ber_p: acc.iter().map(|a| a.err_p).sum::<usize>() as f64 / total as f64,
        i_t: 0.0,
    })
}

/// `mu = sqrt(||X||^2 / (2 m) ln(2 / eps_AT))`.
pub fn mu_bound(norm_inf: f64, m: f64, epsilon_at: f64) -> Result<f64> {
    if !(m > 0.0) || !(epsilon_at > 0.0 && epsilon_at < 1.0) || !(norm_inf >= 0.0) {
        return Err(invalid(format!("mu_bound domain: norm {norm_inf}, m {m}, eps {epsilon_at}")));
    }
    Ok((norm_inf * norm_inf / (2.0 * m) * (2.0 / epsilon_at).ln()).sqrt())
}

/// Sup norms of the displaced number and squared number operators
/// restricted to the detection range: `(M^2 - 1/2, M^4 - M^2/2)`.
pub fn operator_norms(bounded_range: f64) -> (f64, f64) {
    let m2 = bounded_range * bounded_range;
    (m2 - 0.5, m2 * m2 - 0.5 * m2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTestParams {
    pub beta_test: f64,
    pub n_c: usize,
    pub w: f64,
    pub l_t: usize,
    pub k_t: usize,
    pub epsilon_et: f64,
}

impl EnergyTestParams {
    /// Outlier allowance from a relative threshold: `l_T = floor(threshold k_T)`.
    pub fn with_threshold(beta_test: f64, n_c: usize, w: f64, k_t: usize, threshold: f64, epsilon_et: f64) -> Self {
        let l_t = (threshold * k_t as f64 + 1e-9).floor() as usize;
        Self { beta_test, n_c, w, l_t, k_t, epsilon_et }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTestOutcome {
    pub pass: bool,
    pub i_t: f64,
    pub l_t_meas: usize,
}

/// Counts test rounds with `|Y| >= beta_test` and compares against `l_T`.
pub fn energy_test(amplitudes: &[f64], p: &EnergyTestParams) -> EnergyTestOutcome {
    if amplitudes.len() != p.k_t {
        log::warn!("energy test over {} rounds, configured k_T = {}", amplitudes.len(), p.k_t);
    }
    let outliers = amplitudes.iter().filter(|a| **a >= p.beta_test).count();
    energy_test_counts(outliers, amplitudes.len(), p)
}

/// Energy test decision from an outlier count over `k_t` rounds.
pub fn energy_test_counts(outliers: usize, k_t: usize, p: &EnergyTestParams) -> EnergyTestOutcome {
    EnergyTestOutcome {
        pass: outliers <= p.l_t,
        i_t: if k_t == 0 { 0.0 } else { outliers as f64 / k_t as f64 },
        l_t_meas: outliers,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceEntry {
    pub symbol: usize,
    pub observable: Observable,
    pub expected: f64,
    pub mu: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceSet {
    pub version: u32,
    pub mode: EstimatorMode,
    pub beta: [Complex64; 4],
    pub entries: Vec<AcceptanceEntry>,
    pub epsilon_at: f64,
    pub w: f64,
    pub norms: (f64, f64),
}

impl AcceptanceSet {
    pub const VERSION: u32 = 1;

    pub fn entry(&self, symbol: usize, obs: Observable) -> Option<&AcceptanceEntry> {
        self.entries.iter().find(|e| e.symbol == symbol && e.observable == obs)
    }
}

/// Intervals `[<X> - t - mu - w ||X||, <X> + t + mu]` per symbol and
/// observable. `slack` holds `t` for the two observables.
pub fn build_acceptance_set(
    expected: &ObservableStats,
    params: &EnergyTestParams,
    epsilon_at: f64,
    slack: [f64; 2],
    bounded_range: f64,
) -> Result<AcceptanceSet> {
    let norms = operator_norms(bounded_range);
    let mut entries = Vec::with_capacity(8);
    for j in 0..4 {
        for (k, (obs, norm)) in [(Observable::N, norms.0), (Observable::N2, norms.1)].into_iter().enumerate() {
            let mu = mu_bound(norm, expected.m[j] as f64, epsilon_at)?;
            let x = expected.value(j, obs);
            entries.push(AcceptanceEntry {
                symbol: j,
                observable: obs,
                expected: x,
                mu,
                lo: x - slack[k] - mu - params.w * norm,
                hi: x + slack[k] + mu,
            });
        }
    }
    Ok(AcceptanceSet {
        version: AcceptanceSet::VERSION,
        mode: expected.mode,
        beta: expected.beta,
        entries,
        epsilon_at,
        w: params.w,
        norms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub symbol: usize,
    pub observable: Observable,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceOutcome {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

pub fn acceptance_test(observed: &ObservableStats, set: &AcceptanceSet) -> Result<AcceptanceOutcome> {
    if observed.mode != set.mode {
        return Err(Error::KeyMismatch(format!("estimator {:?} vs set {:?}", observed.mode, set.mode)));
    }
    for j in 0..4 {
        if (observed.beta[j] - set.beta[j]).norm() > 1e-9 * (1.0 + set.beta[j].norm()) {
            return Err(Error::KeyMismatch(format!(
                "symbol {j} displacement {} vs {}",
                observed.beta[j], set.beta[j]
            )));
        }
    }
    let mut violations = Vec::new();
    for j in 0..4 {
        for obs in [Observable::N, Observable::N2] {
            let e = set
                .entry(j, obs)
                .ok_or_else(|| Error::KeyMismatch(format!("no interval for symbol {j} {obs}")))?;
            let v = observed.value(j, obs);
            if !(v >= e.lo && v <= e.hi) {
                violations.push(Violation { symbol: j, observable: obs, value: v, lo: e.lo, hi: e.hi });
            }
        }
    }
    Ok(AcceptanceOutcome { pass: violations.is_empty(), violations })
}

/// Model values of `(<n_beta>, <n2_beta>)` for the honest Gaussian channel.
///
/// In ideal mode the displaced outcome is a thermal state of occupation
/// `2 sigma^2 - 1`, with `sigma^2` the per-quadrature heterodyne variance;
/// in trusted mode it is the channel-output thermal state `T xi / 2`.
/// A thermal state of occupation `n` has `<n^2> = 2 n^2 + n`.
pub fn honest_moments(transmittance: f64, xi_a: f64, eta: f64, nu_el: f64, mode: EstimatorMode) -> (f64, f64) {
    let n = match mode {
        EstimatorMode::Ideal => eta * transmittance * xi_a / 2.0 + nu_el,
        EstimatorMode::Trusted { .. } => transmittance * xi_a / 2.0,
    };
    (n, 2.0 * n * n + n)
}
