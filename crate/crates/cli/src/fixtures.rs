//! Measured statistics of the six characterisation runs and the extracted
//! key table, with conversions into analysis inputs.

use cvqkd_core::stats::{build_acceptance_set, AcceptanceSet, EnergyTestParams, EstimatorMode, ObservableStats};
use cvqkd_core::Complex64;
use cvqkd_keyrate::engine::KeyRateInput;
use cvqkd_postproc::ledger::CONFIRM_BITS;
use cvqkd_postproc::ldpc::{CodeSpec, BLOCK_LEN};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Receiver efficiency shared by all runs.
pub const ETA: f64 = 0.720;
/// Key rounds per run.
pub const N_KEY: f64 = 8.9866e8;
/// Published run-averaged excess noise at the channel input (SNU).
pub const XI_AVERAGE: f64 = 2.71e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeOutcome {
    pub code_id: u8,
    /// Frame error rate in percent.
    pub fer_pct: f64,
    /// Efficiency in percent.
    pub beta_pct: f64,
    pub key_mb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunFixture {
    /// Run number, 1 to 6.
    pub run: usize,
    pub n: f64,
    pub n_total: f64,
    pub transmittance: f64,
    pub nu_el: f64,
    /// Relative energy-test outlier count.
    pub i_t: f64,
    pub ber_x: f64,
    pub ber_p: f64,
    pub alpha: [Complex64; 4],
    /// Displaced photon-number moments at the channel output.
    pub mean_n: [f64; 4],
    pub mean_n2: [f64; 4],
    /// Nominal modulation amplitude.
    pub amplitude: f64,
    pub closest: CodeOutcome,
    pub next: CodeOutcome,
}

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

const ALPHA_A: [Complex64; 4] = [c(0.5289, 0.5255), c(0.5338, -0.5442), c(-0.5343, 0.5444), c(-0.5286, -0.5257)];
const ALPHA_B: [Complex64; 4] = [c(0.5263, 0.5221), c(0.5312, -0.5414), c(-0.5314, 0.5420), c(-0.5263, -0.5215)];
const ALPHA_C: [Complex64; 4] = [c(0.5657, 0.5678), c(0.5862, -0.5745), c(-0.5860, 0.5745), c(-0.5660, -0.5681)];
const N_A: [f64; 4] = [0.9458e-3, 0.4128e-3, 0.0691e-3, 1.1511e-3];
const N_B: [f64; 4] = [0.9354e-3, 0.1293e-3, 0.0390e-3, 0.9096e-3];
const N_C: [f64; 4] = [1.0567e-3, 0.2228e-3, 0.2246e-3, 1.4379e-3];
const N2_A: [f64; 4] = [5.2876e-3, 6.9297e-3, 6.3640e-3, 6.8303e-3];
const N2_B: [f64; 4] = [6.1404e-3, 7.0781e-3, 7.1981e-3, 5.9385e-3];
const N2_C: [f64; 4] = [7.4074e-3, 7.3594e-3, 7.2678e-3, 7.2334e-3];

const fn outcome(code_id: u8, fer_pct: f64, beta_pct: f64, key_mb: f64) -> CodeOutcome {
    CodeOutcome { code_id, fer_pct, beta_pct, key_mb }
}

#[allow(clippy::too_many_arguments)]
const fn run(
    run: usize,
    n_total: f64,
    transmittance: f64,
    nu_el: f64,
    i_t: f64,
    ber: (f64, f64),
    moments: ([Complex64; 4], [f64; 4], [f64; 4]),
    amplitude: f64,
    closest: CodeOutcome,
    next: CodeOutcome,
) -> RunFixture {
    RunFixture {
        run,
        n: N_KEY,
        n_total,
        transmittance,
        nu_el,
        i_t,
        ber_x: ber.0,
        ber_p: ber.1,
        alpha: moments.0,
        mean_n: moments.1,
        mean_n2: moments.2,
        amplitude,
        closest,
        next,
    }
}

pub const RUNS: [RunFixture; 6] = [
    run(1, 1.1982e9, 0.4950, 0.1350, 0.6677e-8, (0.3378, 0.3368), (ALPHA_A, N_A, N2_A), 0.7494,
        outcome(1, 16.00, 89.48, 0.19), outcome(0, 0.00, 78.29, 0.74)),
    run(2, 1.1982e9, 0.4950, 0.1351, 0.0, (0.3376, 0.3368), (ALPHA_B, N_B, N2_B), 0.7499,
        outcome(1, 14.37, 89.42, 0.52), outcome(0, 0.00, 78.24, 0.81)),
    run(3, 1.1982e9, 0.4959, 0.1354, 0.6677e-8, (0.3367, 0.3357), (ALPHA_A, N_A, N2_A), 0.7540,
        outcome(1, 5.89, 88.23, 1.60), outcome(0, 0.00, 77.20, 0.55)),
    run(4, 1.1983e9, 0.4938, 0.1348, 0.0, (0.3367, 0.3362), (ALPHA_C, N_C, N2_C), 0.7545,
        outcome(1, 6.18, 88.77, 1.56), outcome(0, 0.00, 77.67, 0.56)),
    run(5, 1.1982e9, 0.4943, 0.1349, 0.0, (0.3253, 0.3245), (ALPHA_C, N_C, N2_C), 0.8111,
        outcome(2, 5.07, 88.13, 1.38), outcome(1, 0.00, 77.12, 0.04)),
    run(6, 1.1982e9, 0.4914, 0.1354, 0.0, (0.3247, 0.3261), (ALPHA_C, N_C, N2_C), 0.8112,
        outcome(2, 9.79, 88.29, 0.49), outcome(1, 0.01, 77.25, 0.00)),
];

/// Fixture by run number (1-based).
pub fn run_fixture(run: usize) -> Result<&'static RunFixture> {
    RUNS.get(run.wrapping_sub(1)).ok_or_else(|| Error::Fixture(format!("no run {run}; runs are 1 to 6")))
}

impl RunFixture {
    /// Test rounds `N - n`.
    pub fn k_t(&self) -> usize {
        (self.n_total - self.n).round() as usize
    }

    /// Test rounds per symbol class.
    pub fn m(&self) -> usize {
        self.k_t() / 4
    }

    /// Outlier count the energy test saw.
    pub fn outliers(&self) -> usize {
        (self.i_t * self.k_t() as f64).round() as usize
    }

    /// Channel-output displacements `sqrt(T) alpha`.
    pub fn beta(&self) -> [Complex64; 4] {
        self.alpha.map(|a| a * self.transmittance.sqrt())
    }

    pub fn observables(&self) -> ObservableStats {
        ObservableStats {
            mode: EstimatorMode::Trusted { nu_el: self.nu_el },
            beta: self.beta(),
            mean_n_beta: self.mean_n,
            mean_n2_beta: self.mean_n2,
            m: [self.m(); 4],
            ber_x: self.ber_x,
            ber_p: self.ber_p,
            i_t: self.i_t,
        }
    }

    pub fn acceptance_set(&self, params: &EnergyTestParams, epsilon_at: f64, slack: [f64; 2], m_range: f64) -> Result<AcceptanceSet> {
        Ok(build_acceptance_set(&self.observables(), params, epsilon_at, slack, m_range)?)
    }

    pub fn keyrate_input<'a>(&self, acceptance: &'a AcceptanceSet) -> KeyRateInput<'a> {
        KeyRateInput {
            acceptance,
            states: self.alpha,
            n: self.n,
            n_total: self.n_total,
            ber_x: self.ber_x,
            ber_p: self.ber_p,
        }
    }

    /// Excess noise at the channel input from the class-averaged `<n_beta>`.
    pub fn xi_a(&self) -> f64 {
        2.0 * self.mean_n.iter().sum::<f64>() / 4.0 / self.transmittance
    }
}

/// Syndrome and confirmation leak of `n` rounds corrected with a code of
/// the given rate at a frame error rate `fer`: per stream `n / L_in`
/// blocks, failed blocks fully disclosed.
pub fn ldpc_leak(code_id: u8, fer: f64, n: f64) -> Result<f64> {
    let spec = CodeSpec::standard(code_id)?;
    let blocks = 2.0 * n / BLOCK_LEN as f64;
    let ok = (spec.l_syn() + CONFIRM_BITS) as f64;
    Ok(blocks * ((1.0 - fer) * ok + fer * BLOCK_LEN as f64))
}

/// Cross-checks of the table: `n / N = 3/4`, the published averages and the
/// noise they imply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureConsistency {
    pub key_fraction: [f64; 6],
    pub mean_transmittance: f64,
    pub mean_n: f64,
    pub mean_n2: f64,
    pub xi_from_mean: f64,
}

pub fn consistency() -> FixtureConsistency {
    let mut key_fraction = [0.0; 6];
    for (k, r) in RUNS.iter().enumerate() {
        key_fraction[k] = r.n / r.n_total;
    }
    let runs = RUNS.len() as f64;
    let mean_transmittance = RUNS.iter().map(|r| r.transmittance).sum::<f64>() / runs;
    let mean_n = RUNS.iter().flat_map(|r| r.mean_n).sum::<f64>() / (4.0 * runs);
    let mean_n2 = RUNS.iter().flat_map(|r| r.mean_n2).sum::<f64>() / (4.0 * runs);
    FixtureConsistency { key_fraction, mean_transmittance, mean_n, mean_n2, xi_from_mean: 2.0 * mean_n / mean_transmittance }
}
