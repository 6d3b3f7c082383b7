use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use cvqkd_core::channel::RunStatistics;
use cvqkd_core::records::{read_records, SymbolRecord};
use cvqkd_core::stats::{
    acceptance_test, build_acceptance_set, energy_test, estimate_displaced_moments, AcceptanceOutcome, AcceptanceSet,
    EnergyTestOutcome, ObservableStats,
};
use cvqkd_core::Complex64;
use serde::{Deserialize, Serialize};

use super::simulate::SimulationMeta;
use super::{read_json, META_FILE, RECORDS_FILE};
use crate::config::ProtocolConfig;
use crate::error::{Error, Result};

/// Parameter-estimation outcome of one run, with the fields of the
/// measured-parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAnalysis {
    pub config: ProtocolConfig,
    pub states: [Complex64; 4],
    pub statistics: RunStatistics,
    /// Key rounds n.
    pub n: usize,
    pub n_total: usize,
    pub k_t: usize,
    pub transmittance: f64,
    pub eta: f64,
    pub nu_el: f64,
    pub observables: ObservableStats,
    /// `2 <n_beta> / T` over the symbol-averaged displaced photon number.
    pub xi_a: f64,
    pub energy: EnergyTestOutcome,
    pub acceptance: AcceptanceSet,
    pub acceptance_outcome: AcceptanceOutcome,
    pub elapsed_s: f64,
}

pub fn load_simulation(dir: &Path) -> Result<(SimulationMeta, Vec<SymbolRecord>)> {
    let meta: SimulationMeta = read_json(&dir.join(META_FILE))?;
    let records = read_records(BufReader::new(File::open(dir.join(RECORDS_FILE))?))?;
    Ok((meta, records))
}

/// Estimates the observables from test rounds, runs the energy test and
/// defines the acceptance set around the honest statistics. With
/// `acceptance` given, the observables are tested against it instead.
pub fn analyze(dir: &Path, acceptance: Option<AcceptanceSet>) -> Result<RunAnalysis> {
    let start = Instant::now();
    let (meta, records) = load_simulation(dir)?;
    analyze_records(&meta, &records, acceptance, start)
}

pub fn analyze_records(
    meta: &SimulationMeta,
    records: &[SymbolRecord],
    acceptance: Option<AcceptanceSet>,
    start: Instant,
) -> Result<RunAnalysis> {
    let cfg = &meta.config;
    let stats = &meta.statistics;
    if records.is_empty() {
        return Err(Error::Config("no signal records".into()));
    }
    if stats.frames.is_empty() {
        return Err(Error::Config("no calibration frames in the sidecar".into()));
    }
    let k_t = records.iter().filter(|r| r.disclosed).count();
    let n = records.len() - k_t;
    let transmittance = stats.mean_transmittance();
    let nu_el = stats.mean_nu_el();
    let eta = cfg.exchange.detector.eta;
    let mode = cfg.estimator(nu_el);
    let mut observables = estimate_displaced_moments(records, &meta.states, transmittance, eta, mode)?;
    let amplitudes: Vec<f64> = records.iter().filter(|r| r.disclosed).filter_map(|r| r.zeta).map(|z| z.norm()).collect();
    let params = cfg.energy_params(k_t);
    let energy = energy_test(&amplitudes, &params);
    observables.i_t = energy.i_t;
    let acceptance = match acceptance {
        Some(a) => a,
        None => build_acceptance_set(&observables, &params, cfg.epsilon.at, cfg.slack, cfg.exchange.detector.bounded_range)?,
    };
    let acceptance_outcome = acceptance_test(&observables, &acceptance)?;
    let xi_a = 2.0 * observables.mean_n_beta.iter().sum::<f64>() / 4.0 / transmittance;
    log::info!("xi_A = {xi_a:.4e}, BER = ({:.4}, {:.4})", observables.ber_x, observables.ber_p);
    Ok(RunAnalysis {
        config: cfg.clone(),
        states: meta.states,
        statistics: stats.clone(),
        n,
        n_total: records.len(),
        k_t,
        transmittance,
        eta,
        nu_el,
        observables,
        xi_a,
        energy,
        acceptance,
        acceptance_outcome,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}
