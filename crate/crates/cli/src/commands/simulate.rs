use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use cvqkd_core::channel::{run_exchange, RunStatistics};
use cvqkd_core::records::write_records;
use cvqkd_core::Complex64;
use serde::{Deserialize, Serialize};

use super::{sha256_file, write_json, META_FILE, RECORDS_FILE};
use crate::config::ProtocolConfig;
use crate::error::Result;

/// Sidecar written next to the record file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMeta {
    pub config: ProtocolConfig,
    pub seed: u64,
    pub states: [Complex64; 4],
    pub statistics: RunStatistics,
    pub records_sha256: String,
    pub elapsed_s: f64,
}

/// Simulates one exchange into `out/records.bin` and `out/meta.json`.
pub fn simulate(cfg: &ProtocolConfig, out: &Path) -> Result<SimulationMeta> {
    cfg.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let seed = cfg.seeds.simulate;
    let ex = run_exchange(&cfg.exchange, seed)?;
    let path = out.join(RECORDS_FILE);
    let mut w = BufWriter::new(File::create(&path)?);
    write_records(&mut w, &ex.records)?;
    w.flush()?;
    drop(w);
    let meta = SimulationMeta {
        config: cfg.clone(),
        seed,
        states: ex.constellation.states,
        statistics: ex.stats,
        records_sha256: sha256_file(&path)?,
        elapsed_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join(META_FILE), &meta)?;
    log::info!("simulated {} signal slots into {}", meta.statistics.n_total, out.display());
    Ok(meta)
}
