//! Protocol configuration with desk-scale defaults.

use std::path::Path;

use cvqkd_core::channel::{ChannelModel, DetectorModel, ExchangeConfig};
use cvqkd_core::dsp::FrameLayout;
use cvqkd_core::stats::{EnergyTestParams, EstimatorMode};
use cvqkd_keyrate::engine::{KeyRateConfig, LeakModel};
use cvqkd_keyrate::finite::EpsilonBudget;
use cvqkd_keyrate::regions::DetectorMode;
use cvqkd_keyrate::solver::FwSettings;
use cvqkd_postproc::epsilon::EpsilonInputs;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub simulate: u64,
    pub session: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub exchange: ExchangeConfig,
    pub delta_r: f64,
    /// Energy-test amplitude threshold.
    pub beta_test: f64,
    /// Allowed relative outlier count of the energy test.
    pub energy_threshold: f64,
    pub n_c: usize,
    pub w: f64,
    /// Receiver treated as trusted (loss and electronic noise not Eve's).
    pub trusted: bool,
    /// Acceptance-interval slack `t` for the two observables.
    pub slack: [f64; 2],
    pub epsilon: EpsilonBudget,
    /// Declared total, checked against the composed budget.
    pub epsilon_total: f64,
    pub pa_bits: f64,
    pub leak: LeakModel,
    pub ecc_id: u8,
    pub seeds: Seeds,
    pub reserve_auth: bool,
    pub fw: FwSettings,
}

impl Default for ProtocolConfig {
    /// Desk scale: 1e6 signal slots with the first run's channel, n_c = 10.
    fn default() -> Self {
        Self {
            exchange: ExchangeConfig {
                n_signal: 1_000_000,
                r_test: 0.25,
                amplitude: 0.7494,
                phase_offset: std::f64::consts::FRAC_PI_4,
                channel: ChannelModel::new(0.4950, 2.71e-3).expect("valid channel"),
                detector: DetectorModel { eta: 0.720, nu_el: 0.1350, bounded_range: 5.0 },
                layout: FrameLayout::default(),
                eve: None,
            },
            delta_r: 0.0,
            beta_test: 5.0,
            energy_threshold: 1e-8,
            n_c: 10,
            w: 1e-7,
            trusted: true,
            slack: [0.0, 0.0],
            epsilon: EpsilonBudget::standard(),
            epsilon_total: 1e-10,
            pa_bits: 100.0,
            leak: LeakModel::Efficiency { beta: 0.95 },
            ecc_id: 1,
            seeds: Seeds { simulate: 1, session: 2 },
            reserve_auth: true,
            fw: FwSettings::default(),
        }
    }
}

impl ProtocolConfig {
    /// Full-scale solver profile: n_c = 20 (statistics come from fixtures).
    pub fn full_scale() -> Self {
        Self { n_c: 20, ..Self::default() }
    }

    /// Desk-scale simulation of one measured run: its amplitude, channel and
    /// receiver, with the run-averaged excess noise.
    pub fn for_run(run: usize) -> Result<Self> {
        let f = crate::fixtures::run_fixture(run)?;
        let mut cfg = Self::default();
        cfg.exchange.amplitude = f.amplitude;
        cfg.exchange.channel = ChannelModel::new(f.transmittance, crate::fixtures::XI_AVERAGE)?;
        cfg.exchange.detector.nu_el = f.nu_el;
        cfg.ecc_id = f.closest.code_id;
        cfg.seeds.simulate = run as u64;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let ex = &self.exchange;
        ex.channel.validate()?;
        ex.detector.validate()?;
        let per_frame = ex.layout.n_signal;
        if per_frame == 0 || ex.n_signal % per_frame != 0 {
            return Err(Error::Config(format!("N = {} is not a multiple of {per_frame} signal slots per frame", ex.n_signal)));
        }
        if !(0.0..1.0).contains(&ex.r_test) || !(ex.amplitude >= 0.0) {
            return Err(Error::Config("r_test must lie in [0, 1) and the amplitude be >= 0".into()));
        }
        if !(self.beta_test > 0.0) || !(self.w >= 0.0 && self.w < 1.0) || self.n_c < 1 {
            return Err(Error::Config("need beta_test > 0, 0 <= w < 1 and n_c >= 1".into()));
        }
        if !(self.delta_r >= 0.0 && self.delta_r < ex.detector.bounded_range) {
            return Err(Error::Config("need 0 <= delta_r < M".into()));
        }
        self.epsilon.validate()?;
        let total = self.epsilon.total();
        if (total - self.epsilon_total).abs() > 1e-9 * self.epsilon_total {
            return Err(Error::Config(format!("epsilon budget composes to {total:e}, declared {:e}", self.epsilon_total)));
        }
        if self.ecc_id > 2 {
            return Err(Error::Config(format!("unknown code id {}", self.ecc_id)));
        }
        Ok(())
    }

    /// Estimator plane for a calibrated electronic noise `nu_el`.
    pub fn estimator(&self, nu_el: f64) -> EstimatorMode {
        if self.trusted {
            EstimatorMode::Trusted { nu_el }
        } else {
            EstimatorMode::Ideal
        }
    }

    pub fn detector_mode(&self, nu_el: f64) -> DetectorMode {
        if self.trusted {
            DetectorMode::Trusted { eta: self.exchange.detector.eta, nu_el }
        } else {
            DetectorMode::Ideal
        }
    }

    pub fn energy_params(&self, k_t: usize) -> EnergyTestParams {
        EnergyTestParams::with_threshold(self.beta_test, self.n_c, self.w, k_t, self.energy_threshold, self.epsilon.et)
    }

    pub fn keyrate_config(&self, nu_el: f64) -> KeyRateConfig {
        KeyRateConfig {
            n_c: self.n_c,
            bounded_range: self.exchange.detector.bounded_range,
            delta_r: self.delta_r,
            detector: self.detector_mode(nu_el),
            epsilon: self.epsilon,
            pa_bits: self.pa_bits,
            leak: self.leak,
            fw: self.fw,
            ..KeyRateConfig::default()
        }
    }

    pub fn epsilon_inputs(&self) -> EpsilonInputs {
        EpsilonInputs {
            epsilon_et: self.epsilon.et,
            epsilon_at: self.epsilon.at,
            epsilon_bar: self.epsilon.bar,
            pa_bits: self.pa_bits,
            ..EpsilonInputs::default()
        }
    }
}
