use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cvqkd_core::stats::estimate_displaced_moments;
use cvqkd_core::Complex64;
use cvqkd_postproc::auth::SECRET_BYTES;
use cvqkd_postproc::entropy::EntropySource;
use cvqkd_postproc::ldpc::LdpcCode;
use cvqkd_postproc::session::{run_session, KeySizing, Role, RoleData, SessionConfig, SessionReport};
use serde::{Deserialize, Serialize};

use super::analyze::load_simulation;
use super::keyrate::KeyrateRun;
use super::{read_json, write_json};
use crate::error::{Error, Result};

pub const KEY_FILE: &str = "key.bin";
pub const DIGEST_FILE: &str = "key.sha256";
pub const SESSION_FILE: &str = "session.json";
pub const NEXT_SECRET_FILE: &str = "next_secret.bin";

/// How long a connecting peer keeps retrying.
const CONNECT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// Accepts one connection; the bound address is written to the file if given.
    Listen { addr: String, port_file: Option<PathBuf> },
    Connect { addr: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineArgs {
    pub role: Role,
    pub endpoint: Endpoint,
    pub simulation: PathBuf,
    /// Key-rate run to size the key from.
    pub keyrate: Option<PathBuf>,
    /// Explicit key length instead of the bound.
    pub fixed_bits: Option<u64>,
    pub secret: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub session: SessionReport,
    pub crossover: [f64; 2],
    pub key_file: String,
    pub elapsed_s: f64,
}

fn open_endpoint(ep: &Endpoint) -> Result<TcpStream> {
    let stream = match ep {
        Endpoint::Listen { addr, port_file } => {
            let listener = TcpListener::bind(addr)?;
            let local = listener.local_addr()?;
            log::info!("listening on {local}");
            if let Some(p) = port_file {
                let tmp = p.with_extension("tmp");
                std::fs::write(&tmp, local.to_string())?;
                std::fs::rename(&tmp, p)?;
            }
            listener.accept()?.0
        }
        Endpoint::Connect { addr } => {
            let deadline = Instant::now() + CONNECT_TIMEOUT;
            loop {
                match TcpStream::connect(addr.as_str()) {
                    Ok(s) => break s,
                    Err(e) if Instant::now() < deadline => {
                        log::debug!("connect to {addr}: {e}; retrying");
                        std::thread::sleep(Duration::from_millis(100));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
    };
    stream.set_nodelay(true)?;
    Ok(stream)
}

pub fn read_secret(path: &Path) -> Result<Vec<u8>> {
    let secret = std::fs::read(path)?;
    if secret.len() != SECRET_BYTES {
        return Err(Error::Config(format!("secret must be {SECRET_BYTES} bytes, got {}", secret.len())));
    }
    Ok(secret)
}

/// Runs one peer over TCP and writes the key, its digest and the session report.
pub fn pipeline(args: &PipelineArgs) -> Result<PipelineRun> {
    let start = Instant::now();
    let sizing = match (&args.keyrate, args.fixed_bits) {
        (Some(path), None) => {
            let run: KeyrateRun = read_json(path)?;
            KeySizing::Report { report: Box::new(run.report) }
        }
        (None, Some(bits)) => KeySizing::Fixed { bits },
        _ => return Err(Error::Config("give exactly one of a key-rate report and a fixed length".into())),
    };
    let secret = read_secret(&args.secret)?;
    let (meta, records) = load_simulation(&args.simulation)?;
    let cfg = &meta.config;
    cfg.validate()?;

    // both peers hold the disclosed test rounds, so both derive the same priors
    let det = &cfg.exchange.detector;
    let nu_el = meta.statistics.mean_nu_el();
    let obs = estimate_displaced_moments(
        &records,
        &meta.states,
        meta.statistics.mean_transmittance(),
        det.eta,
        cfg.estimator(nu_el),
    )?;
    let crossover = [obs.ber_x, obs.ber_p];
    let key_rounds: Vec<_> = records.iter().filter(|r| !r.disclosed).collect();

    let mut scfg = SessionConfig::new(sizing, crossover);
    scfg.session_id = cfg.seeds.session;
    scfg.m_range = det.bounded_range;
    scfg.delta_r = cfg.delta_r;
    scfg.reserve_auth = cfg.reserve_auth;
    scfg.epsilon = cfg.epsilon_inputs();

    let code = LdpcCode::standard(cfg.ecc_id)?;
    let mut entropy = EntropySource::seeded(cfg.seeds.session, 0);
    let symbols: Vec<u8>;
    let outcomes: Vec<Complex64>;
    let data = match args.role {
        Role::Alice => {
            symbols = key_rounds.iter().map(|r| r.alice_symbol.unwrap_or(0)).collect();
            RoleData::Alice { states: meta.states, symbols: &symbols }
        }
        Role::Bob => {
            outcomes = key_rounds.iter().map(|r| r.zeta.unwrap_or_default()).collect();
            RoleData::Bob { outcomes: &outcomes }
        }
    };
    let mut stream = open_endpoint(&args.endpoint)?;
    let output = run_session(data, &code, &scfg, &secret, &mut entropy, &mut stream)?;

    std::fs::create_dir_all(&args.out)?;
    let key_path = args.out.join(KEY_FILE);
    std::fs::write(&key_path, output.key.to_bytes())?;
    std::fs::write(args.out.join(DIGEST_FILE), format!("{}\n", output.report.key_sha256))?;
    if let Some(next) = &output.next_auth_secret {
        std::fs::write(args.out.join(NEXT_SECRET_FILE), next)?;
    }
    let run = PipelineRun {
        session: output.report,
        crossover,
        key_file: KEY_FILE.into(),
        elapsed_s: start.elapsed().as_secs_f64(),
    };
    write_json(&args.out.join(SESSION_FILE), &run)?;
    log::info!("{:?}: {} key bits, sha256 {}", args.role, run.session.key_bits, run.session.key_sha256);
    Ok(run)
}
