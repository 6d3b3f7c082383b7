use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cvqkd_cli::commands::analyze::{analyze, RunAnalysis};
use cvqkd_cli::commands::keyrate::{keyrate_from_analysis, keyrate_from_fixture, KeyrateRun, LeakChoice};
use cvqkd_cli::commands::pipeline::{pipeline, Endpoint, PipelineArgs, PipelineRun};
use cvqkd_cli::commands::report::build_report;
use cvqkd_cli::commands::simulate::{simulate, SimulationMeta};
use cvqkd_cli::commands::{read_json, write_json, META_FILE};
use cvqkd_cli::config::ProtocolConfig;
use cvqkd_cli::error::{exit, Error, Result};
use cvqkd_cli::fixtures::run_fixture;
use cvqkd_postproc::session::Role;

/// Simulated CV-QKD link: exchange, parameter estimation, key-rate bound and
/// authenticated post-processing.
#[derive(Debug, Parser)]
#[command(name = "cvqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON configuration; defaults to the desk-scale profile.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the desk simulation of a measured run (1 to 6).
    #[arg(long, conflicts_with = "config")]
    run: Option<usize>,
    /// Override the number of signal slots.
    #[arg(long)]
    n_signal: Option<usize>,
    /// Override the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the Fock cutoff.
    #[arg(long)]
    n_c: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self, base: Option<ProtocolConfig>) -> Result<ProtocolConfig> {
        let mut cfg = match (&self.config, self.run, base) {
            (Some(p), _, _) => ProtocolConfig::load(p)?,
            (None, Some(r), _) => ProtocolConfig::for_run(r)?,
            (None, None, Some(b)) => b,
            (None, None, None) => ProtocolConfig::default(),
        };
        if let Some(n) = self.n_signal {
            cfg.exchange.n_signal = n;
        }
        if let Some(s) = self.seed {
            cfg.seeds.simulate = s;
        }
        if let Some(n_c) = self.n_c {
            cfg.n_c = n_c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RoleArg {
    Alice,
    Bob,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a configuration file.
    Config {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Full-scale solver profile.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate an exchange into a directory of records and metadata.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the observables and run the energy and acceptance tests.
    Analyze {
        #[arg(long)]
        sim: PathBuf,
        /// Test against this acceptance set instead of defining one.
        #[arg(long)]
        acceptance: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bound the conditional entropy and size the key.
    Keyrate {
        #[arg(long, required_unless_present = "fixture")]
        analysis: Option<PathBuf>,
        /// Use the measured statistics of a run (1 to 6).
        #[arg(long, conflicts_with = "analysis")]
        fixture: Option<usize>,
        #[arg(long, value_enum, default_value = "efficiency")]
        leak: LeakChoice,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one peer of the post-processing session over TCP.
    Pipeline {
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long, required_unless_present = "connect")]
        listen: Option<String>,
        /// File receiving the bound address when listening.
        #[arg(long, requires = "listen")]
        port_file: Option<PathBuf>,
        #[arg(long, conflicts_with = "listen")]
        connect: Option<String>,
        #[arg(long)]
        sim: PathBuf,
        #[arg(long, required_unless_present = "fixed_bits")]
        keyrate: Option<PathBuf>,
        #[arg(long, conflicts_with = "keyrate")]
        fixed_bits: Option<u64>,
        /// Pre-shared authentication secret (24 raw bytes).
        #[arg(long)]
        secret: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Combine the artifacts of a run and check them against each other.
    Report {
        #[arg(long)]
        sim: Option<PathBuf>,
        #[arg(long)]
        analysis: PathBuf,
        #[arg(long)]
        keyrate: Option<PathBuf>,
        /// Pipeline output directory.
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Config { cfg, full, out } => {
            let base = full.then(ProtocolConfig::full_scale);
            write_json(&out, &cfg.resolve(base)?)?;
        }
        Command::Simulate { cfg, out } => {
            let meta = simulate(&cfg.resolve(None)?, &out)?;
            println!("{}", meta.records_sha256);
        }
        Command::Analyze { sim, acceptance, out } => {
            let set = acceptance.map(|p| read_json(&p)).transpose()?;
            let a = analyze(&sim, set)?;
            write_json(&out, &a)?;
            if !a.energy.pass || !a.acceptance_outcome.pass {
                return Err(Error::Abort("parameter estimation rejected the run".into()));
            }
        }
        Command::Keyrate { analysis, fixture, leak, cfg, out } => {
            let run = match (analysis, fixture) {
                (Some(p), _) => {
                    let a: RunAnalysis = read_json(&p)?;
                    keyrate_from_analysis(&a, &cfg.resolve(Some(a.config.clone()))?)?
                }
                (None, Some(r)) => keyrate_from_fixture(run_fixture(r)?, &cfg.resolve(Some(ProtocolConfig::full_scale()))?, leak)?,
                (None, None) => return Err(Error::Config("need --analysis or --fixture".into())),
            };
            write_json(&out, &run)?;
            println!("l = {} bits, rate = {:.6e}", run.report.l, run.report.rate);
            if run.report.abort {
                return Ok(exit::ABORT);
            }
        }
        Command::Pipeline { role, listen, port_file, connect, sim, keyrate, fixed_bits, secret, out } => {
            let endpoint = match (listen, connect) {
                (Some(addr), None) => Endpoint::Listen { addr, port_file },
                (None, Some(addr)) => Endpoint::Connect { addr },
                _ => return Err(Error::Config("need exactly one of --listen and --connect".into())),
            };
            let role = match role {
                RoleArg::Alice => Role::Alice,
                RoleArg::Bob => Role::Bob,
            };
            let run = pipeline(&PipelineArgs { role, endpoint, simulation: sim, keyrate, fixed_bits, secret, out })?;
            println!("{}", run.session.key_sha256);
            if run.session.abort {
                return Ok(exit::ABORT);
            }
        }
        Command::Report { sim, analysis, keyrate, session, out } => {
            let a: RunAnalysis = read_json(&analysis)?;
            let k: Option<KeyrateRun> = keyrate.map(|p| read_json(&p)).transpose()?;
            let p: PipelineRun = read_json(&session.join(cvqkd_cli::commands::pipeline::SESSION_FILE))?;
            let simulate_s = match sim {
                Some(dir) => Some(read_json::<SimulationMeta>(&dir.join(META_FILE))?.elapsed_s),
                None => None,
            };
            let key = session.join(&p.key_file);
            let report = build_report(&a, k.as_ref(), &p, Some(&key), simulate_s)?;
            write_json(&out, &report)?;
            for issue in &report.inconsistencies {
                eprintln!("inconsistent: {issue}");
            }
            if !report.is_consistent() {
                return Ok(exit::FAILURE);
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CVQKD_LOG", "warn")).init();
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
