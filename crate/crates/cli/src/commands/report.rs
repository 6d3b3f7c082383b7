use std::path::Path;

use cvqkd_core::channel::RunStatistics;
use cvqkd_keyrate::finite::KeyLengthReport;
use cvqkd_postproc::ledger::LeakSummary;
use cvqkd_postproc::session::SessionReport;
use serde::{Deserialize, Serialize};

use super::analyze::RunAnalysis;
use super::keyrate::KeyrateRun;
use super::pipeline::PipelineRun;
use super::sha256_file;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub simulate_s: Option<f64>,
    pub analyze_s: Option<f64>,
    pub keyrate_s: Option<f64>,
    pub pipeline_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub energy_test: bool,
    pub acceptance_test: bool,
    pub key_abort: bool,
}

/// Everything one run produced, with its internal cross-checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub statistics: RunStatistics,
    pub xi_a: f64,
    pub ber: [f64; 2],
    pub verdicts: Verdicts,
    pub key_length: Option<KeyLengthReport>,
    pub leak: LeakSummary,
    pub pa_output_bits: u64,
    pub key_bits: u64,
    pub auth_reserved_bits: u64,
    pub key_sha256: String,
    pub timings: Timings,
    /// Failed cross-checks; empty when the report is consistent.
    pub inconsistencies: Vec<String>,
}

impl RunReport {
    pub fn is_consistent(&self) -> bool {
        self.inconsistencies.is_empty()
    }
}

/// Checks the session against its own ledger, the sizing it used and the key on disk.
pub fn session_checks(s: &SessionReport, key_digest: Option<&str>) -> Vec<String> {
    let mut bad = Vec::new();
    if s.pa_output_bits != s.key_bits + s.auth_reserved_bits {
        bad.push(format!("PA output {} != key {} + reserve {}", s.pa_output_bits, s.key_bits, s.auth_reserved_bits));
    }
    match s.ledger.leak_accounting() {
        Ok(ledger) if ledger == s.leak => {}
        Ok(_) => bad.push("leak summary differs from the block ledger".into()),
        Err(e) => bad.push(format!("block ledger: {e}")),
    }
    if let Some(bound) = s.bound_bits {
        // the whole reconciled string enters privacy amplification
        let expect = if bound < 1.0 { 0 } else { (bound.floor() as u64).min(s.leak.raw_bits) };
        if s.pa_output_bits != expect {
            bad.push(format!("PA output {} != sized length {expect}", s.pa_output_bits));
        }
    }
    if s.abort != (s.key_bits == 0) {
        bad.push("abort flag disagrees with the key length".into());
    }
    if let Some(d) = key_digest {
        if d != s.key_sha256 {
            bad.push("key file digest differs from the session report".into());
        }
    }
    bad
}

pub fn build_report(
    analysis: &RunAnalysis,
    keyrate: Option<&KeyrateRun>,
    pipeline: &PipelineRun,
    key_file: Option<&Path>,
    simulate_s: Option<f64>,
) -> Result<RunReport> {
    let s = &pipeline.session;
    let digest = key_file.map(sha256_file).transpose()?;
    let mut inconsistencies = session_checks(s, digest.as_deref());
    if let Some(k) = keyrate {
        if (k.report.n - analysis.n as f64).abs() > 0.5 || (k.report.n_total - analysis.n_total as f64).abs() > 0.5 {
            inconsistencies.push("key-rate report was computed for other round counts".into());
        }
    }
    if s.rounds != analysis.n as u64 {
        inconsistencies.push(format!("session saw {} rounds, analysis {}", s.rounds, analysis.n));
    }
    Ok(RunReport {
        statistics: analysis.statistics.clone(),
        xi_a: analysis.xi_a,
        ber: [analysis.observables.ber_x, analysis.observables.ber_p],
        verdicts: Verdicts {
            energy_test: analysis.energy.pass,
            acceptance_test: analysis.acceptance_outcome.pass,
            key_abort: s.abort,
        },
        key_length: keyrate.map(|k| k.report.clone()),
        leak: s.leak,
        pa_output_bits: s.pa_output_bits,
        key_bits: s.key_bits,
        auth_reserved_bits: s.auth_reserved_bits,
        key_sha256: s.key_sha256.clone(),
        timings: Timings {
            simulate_s,
            analyze_s: Some(analysis.elapsed_s),
            keyrate_s: keyrate.map(|k| k.elapsed_s),
            pipeline_s: Some(pipeline.elapsed_s),
        },
        inconsistencies,
    })
}
