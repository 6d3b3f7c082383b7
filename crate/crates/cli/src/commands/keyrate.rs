use std::time::Instant;

use cvqkd_core::stats::{energy_test_counts, AcceptanceSet};
use cvqkd_keyrate::engine::{solve_key_rate, KeyRateInput, LeakModel};
use cvqkd_keyrate::finite::KeyLengthReport;
use serde::{Deserialize, Serialize};

use super::analyze::RunAnalysis;
use crate::config::ProtocolConfig;
use crate::error::{Error, Result};
use crate::fixtures::{ldpc_leak, RunFixture};

/// Error-correction cost used in the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LeakChoice {
    /// Efficiency model from the configuration.
    Efficiency,
    /// Measured cost of the code closest to the BER (fixtures only).
    Closest,
    /// Measured cost of the next code (fixtures only).
    Next,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyrateRun {
    pub source: String,
    pub n_c: usize,
    pub leak_model: LeakModel,
    pub energy_pass: bool,
    pub acceptance_pass: bool,
    pub report: KeyLengthReport,
    pub elapsed_s: f64,
}

fn solve(
    cfg: &ProtocolConfig,
    source: String,
    nu_el: f64,
    leak: LeakModel,
    (energy_pass, acceptance_pass): (bool, bool),
    input: &KeyRateInput<'_>,
    start: Instant,
) -> Result<KeyrateRun> {
    if !energy_pass {
        return Err(Error::Abort("energy test failed".into()));
    }
    if !acceptance_pass {
        return Err(Error::Abort("observables outside the acceptance set".into()));
    }
    let mut kcfg = cfg.keyrate_config(nu_el);
    kcfg.leak = leak;
    let report = solve_key_rate(input, &kcfg)?;
    log::info!("{source}: H >= {:.5}, l = {}, rate {:.4e}", report.entropy_lb, report.l, report.rate);
    Ok(KeyrateRun {
        source,
        n_c: cfg.n_c,
        leak_model: leak,
        energy_pass,
        acceptance_pass,
        report,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

/// Bound for a simulated run from its analysis.
pub fn keyrate_from_analysis(a: &RunAnalysis, cfg: &ProtocolConfig) -> Result<KeyrateRun> {
    let start = Instant::now();
    cfg.validate()?;
    let input = KeyRateInput {
        acceptance: &a.acceptance,
        states: a.states,
        n: a.n as f64,
        n_total: a.n_total as f64,
        ber_x: a.observables.ber_x,
        ber_p: a.observables.ber_p,
    };
    let verdicts = (a.energy.pass, a.acceptance_outcome.pass);
    solve(cfg, "analysis".into(), a.nu_el, cfg.leak, verdicts, &input, start)
}

/// Acceptance set a fixture run defines for itself.
pub fn fixture_acceptance(f: &RunFixture, cfg: &ProtocolConfig) -> Result<AcceptanceSet> {
    let params = cfg.energy_params(f.k_t());
    f.acceptance_set(&params, cfg.epsilon.at, cfg.slack, cfg.exchange.detector.bounded_range)
}

/// Bound for one of the measured runs.
pub fn keyrate_from_fixture(f: &RunFixture, cfg: &ProtocolConfig, leak: LeakChoice) -> Result<KeyrateRun> {
    let start = Instant::now();
    cfg.validate()?;
    let acceptance = fixture_acceptance(f, cfg)?;
    let energy = energy_test_counts(f.outliers(), f.k_t(), &cfg.energy_params(f.k_t()));
    let leak_model = match leak {
        LeakChoice::Efficiency => cfg.leak,
        LeakChoice::Closest => LeakModel::Bits { leak_ec: ldpc_leak(f.closest.code_id, f.closest.fer_pct / 100.0, f.n)? },
        LeakChoice::Next => LeakModel::Bits { leak_ec: ldpc_leak(f.next.code_id, f.next.fer_pct / 100.0, f.n)? },
    };
    let input = f.keyrate_input(&acceptance);
    solve(cfg, format!("run {}", f.run), f.nu_el, leak_model, (energy.pass, true), &input, start)
}
