//! End-to-end evaluation from an acceptance set to a key length.

use cvqkd_core::protocol::{alice_reduced_state_from, UNIFORM_PRIORS};
use cvqkd_core::stats::{AcceptanceSet, EstimatorMode};
use cvqkd_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::constraints::{ConstraintSet, IntervalMode};
use crate::error::{invalid, Result};
use crate::finite::{
    key_length, leak_per_symbol_from_efficiency, pa_epsilon_for_bits, Corrections, EpsilonBudget, KeyLengthReport,
};
use crate::objective::KeyMapKraus;
use crate::regions::{region_operators, DetectorMode};
use crate::solver::{entropy_bound, FwSettings};

/// Error-correction leakage, either from a code efficiency or as a count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeakModel {
    Efficiency { beta: f64 },
    Bits { leak_ec: f64 },
}

impl LeakModel {
    pub fn leak_bits(&self, n: f64, ber_x: f64, ber_p: f64) -> f64 {
        match *self {
            Self::Efficiency { beta } => n * leak_per_symbol_from_efficiency(beta, ber_x, ber_p),
            Self::Bits { leak_ec } => leak_ec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateConfig {
    pub n_c: usize,
    pub bounded_range: f64,
    pub delta_r: f64,
    pub detector: DetectorMode,
    #[serde(default)]
    pub interval_mode: IntervalMode,
    pub priors: [f64; 4],
    pub epsilon: EpsilonBudget,
    /// Bits subtracted in privacy amplification, `2 log2(1 / eps_PA,imp)`.
    pub pa_bits: f64,
    pub leak: LeakModel,
    pub fw: FwSettings,
}

impl Default for KeyRateConfig {
    fn default() -> Self {
        Self {
            n_c: 10,
            bounded_range: 5.0,
            delta_r: 0.0,
            detector: DetectorMode::Ideal,
            interval_mode: IntervalMode::Canonical,
            priors: UNIFORM_PRIORS,
            epsilon: EpsilonBudget::standard(),
            pa_bits: 100.0,
            leak: LeakModel::Efficiency { beta: 0.95 },
            fw: FwSettings::default(),
        }
    }
}

/// Data a key-rate evaluation needs besides the configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRateInput<'a> {
    pub acceptance: &'a AcceptanceSet,
    /// Alice's prepared coherent amplitudes.
    pub states: [Complex64; 4],
    /// Key rounds.
    pub n: f64,
    /// All signal rounds.
    pub n_total: f64,
    pub ber_x: f64,
    pub ber_p: f64,
}

fn check_modes(set: EstimatorMode, det: DetectorMode) -> Result<()> {
    match (set, det) {
        (EstimatorMode::Ideal, DetectorMode::Ideal) => Ok(()),
        (EstimatorMode::Trusted { nu_el: a }, DetectorMode::Trusted { nu_el: b, .. }) if (a - b).abs() <= 1e-12 => {
            Ok(())
        }
        _ => Err(invalid(format!("acceptance set mode {set:?} does not match detector {det:?}"))),
    }
}

pub fn constraint_set(input: &KeyRateInput<'_>, cfg: &KeyRateConfig) -> Result<ConstraintSet> {
    check_modes(input.acceptance.mode, cfg.detector)?;
    let rho_a = alice_reduced_state_from(&input.states, cfg.priors)?;
    ConstraintSet::from_acceptance(input.acceptance, &rho_a, cfg.priors, cfg.n_c, cfg.interval_mode)
}

/// Solves for the entropy bound and evaluates the key length from its
/// certified lower end.
pub fn solve_key_rate(input: &KeyRateInput<'_>, cfg: &KeyRateConfig) -> Result<KeyLengthReport> {
    let cs = constraint_set(input, cfg)?;
    let regions = region_operators(cfg.bounded_range, cfg.delta_r, cfg.n_c, cfg.detector)?;
    let kraus = KeyMapKraus::new(&regions);
    let bound = entropy_bound(&cs, &kraus, &cfg.fw)?;
    log::info!(
        "entropy bound [{:.6}, {:.6}] after {} iterations (gap {:.2e})",
        bound.lower,
        bound.upper,
        bound.iterations,
        bound.fw_gap
    );
    let corrections = Corrections::new(cfg.epsilon.bar, input.n, cs.w)?;
    let leak = cfg.leak.leak_bits(input.n, input.ber_x, input.ber_p);
    let mut report = key_length(
        bound.lower,
        corrections,
        leak,
        cfg.epsilon,
        pa_epsilon_for_bits(cfg.pa_bits),
        input.n,
        input.n_total,
    )?;
    report.solver = Some(bound);
    Ok(report)
}
