//! Emulated optical channel and trusted heterodyne receiver.

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{FrameLayout, SlotRole};
use crate::error::{invalid, Result};
use crate::protocol::{snu, QpskConstellation};
use crate::records::SymbolRecord;
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub transmittance: f64,
    /// Excess noise referenced at the channel input, homodyne SNU.
    pub xi_a: f64,
    /// Optional per-frame transmittance overriding `transmittance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_frame_t: Option<Vec<f64>>,
}

impl ChannelModel {
    pub fn new(transmittance: f64, xi_a: f64) -> Result<Self> {
        let m = Self { transmittance, xi_a, per_frame_t: None };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let check_t = |t: f64| {
            if t > 0.0 && t <= 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("transmittance must lie in (0, 1], got {t}")))
            }
        };
        check_t(self.transmittance)?;
        if let Some(ts) = &self.per_frame_t {
            ts.iter().try_for_each(|t| check_t(*t))?;
        }
        if !(self.xi_a >= 0.0) {
            return Err(invalid(format!("excess noise must be non-negative, got {}", self.xi_a)));
        }
        Ok(())
    }

    pub fn transmittance_for(&self, frame: usize) -> f64 {
        self.per_frame_t
            .as_ref()
            .and_then(|t| t.get(frame).copied())
            .unwrap_or(self.transmittance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eta: f64,
    pub nu_el: f64,
    pub bounded_range: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self { eta: 1.0, nu_el: 0.0, bounded_range: 5.0 }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid(format!("efficiency must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.nu_el >= 0.0) || !(self.bounded_range > 0.0) {
            return Err(invalid("nu_el must be >= 0 and the detection range > 0"));
        }
        Ok(())
    }
}

/// Adversarial modification applied on top of the honest channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct EveHook {
    /// Multiplicative transmittance factor in (0, 1].
    #[serde(default = "one")]
    pub extra_loss: f64,
    /// Additional channel-input excess noise (SNU).
    #[serde(default)]
    pub extra_xi: f64,
    /// Coherent displacement added at the channel output.
    #[serde(default)]
    pub displacement: Complex64,
}

fn one() -> f64 {
    1.0
}

/// Per-quadrature variance of a heterodyne outcome: vacuum, channel thermal
/// noise `T xi/2` attenuated by `eta`, and electronic noise.
pub fn heterodyne_variance(transmittance: f64, xi_a: f64, det: &DetectorModel) -> f64 {
    0.5 * (1.0 + det.eta * snu::excess_noise_to_photons(transmittance * xi_a) + det.nu_el)
}

fn gaussian_pair<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Complex64::new(x, y) * sigma
}

/// One heterodyne outcome `zeta = sqrt(T eta) alpha + n`.
pub fn heterodyne_sample<R: Rng + ?Sized>(
    alpha: Complex64,
    ch: &ChannelModel,
    det: &DetectorModel,
    rng: &mut R,
) -> Complex64 {
    sample_with(alpha, ch.transmittance, ch.xi_a, det, rng)
}

fn sample_with<R: Rng + ?Sized>(alpha: Complex64, t: f64, xi: f64, det: &DetectorModel, rng: &mut R) -> Complex64 {
    (t * det.eta).sqrt() * alpha + gaussian_pair(rng, heterodyne_variance(t, xi, det).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeConfig {
    /// Signal slots N.
    pub n_signal: usize,
    pub r_test: f64,
    pub amplitude: f64,
    #[serde(default = "default_offset")]
    pub phase_offset: f64,
    pub channel: ChannelModel,
    pub detector: DetectorModel,
    #[serde(default)]
    pub layout: FrameLayout,
    #[serde(default)]
    pub eve: Option<EveHook>,
}

fn default_offset() -> f64 {
    std::f64::consts::FRAC_PI_4
}

/// Per-frame calibration outcome in SNU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCalibration {
    pub frame_id: u32,
    pub vacuum_variance: f64,
    pub detector_variance: f64,
    pub nu_el: f64,
    pub transmittance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatistics {
    pub n_total: usize,
    pub k_test: usize,
    pub n_key: usize,
    pub per_symbol_test: [usize; 4],
    pub per_symbol_total: [usize; 4],
    pub frames: Vec<FrameCalibration>,
}

impl RunStatistics {
    pub fn mean_nu_el(&self) -> f64 {
        self.frames.iter().map(|f| f.nu_el).sum::<f64>() / self.frames.len().max(1) as f64
    }

    pub fn mean_transmittance(&self) -> f64 {
        self.frames.iter().map(|f| f.transmittance).sum::<f64>() / self.frames.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exchange {
    pub constellation: QpskConstellation,
    /// Signal-slot records ordered by global index.
    pub records: Vec<SymbolRecord>,
    pub stats: RunStatistics,
}

/// Relative power fluctuation of the simulated monitor diode.
const MONITOR_NOISE: f64 = 1e-4;

/// Simulates N signal slots framed by the layout.
///
/// The symbol string is a uniformly random permutation of a balanced
/// multiset (`N/4` of each symbol, remainder drawn uniformly), and the test
/// subset is an exact-count stratified sample, `round(r_test N_j)` per
/// symbol class. Each frame's noise is drawn from its own stream, so the
/// result is independent of the rayon schedule.
pub fn run_exchange(config: &ExchangeConfig, seed: u64) -> Result<Exchange> {
    config.channel.validate()?;
    config.detector.validate()?;
    if !(0.0..=1.0).contains(&config.r_test) {
        return Err(invalid(format!("r_test must lie in [0, 1], got {}", config.r_test)));
    }
    let layout = config.layout;
    let constellation = QpskConstellation::new(config.amplitude, config.phase_offset)?;
    let n = config.n_signal;

    let mut sym_rng = stream_rng(seed, Stream::Symbols, 0);
    let mut symbols: Vec<u8> = (0..n).map(|i| (i % 4) as u8).collect();
    let balanced = n - n % 4;
    for s in &mut symbols[balanced..] {
        *s = sym_rng.random_range(0..4);
    }
    symbols.shuffle(&mut sym_rng);

    let mut disclosed = vec![false; n];
    let mut per_symbol_total = [0usize; 4];
    let mut per_symbol_test = [0usize; 4];
    let mut sel_rng = stream_rng(seed, Stream::TestSelection, 0);
    for j in 0..4u8 {
        let class: Vec<usize> = (0..n).filter(|&i| symbols[i] == j).collect();
        let k = (config.r_test * class.len() as f64).round() as usize;
        per_symbol_total[j as usize] = class.len();
        per_symbol_test[j as usize] = k;
        for pick in sample_indices(&mut sel_rng, class.len(), k) {
            disclosed[class[pick]] = true;
        }
    }

    let per_frame = layout.n_signal.max(1);
    let n_frames = n.div_ceil(per_frame);
    let slots = layout.slots_per_frame() as u64;
    let eve = config.eve.unwrap_or(EveHook { extra_loss: 1.0, ..Default::default() });

    let frames: Vec<(Vec<SymbolRecord>, FrameCalibration)> = (0..n_frames)
        .into_par_iter()
        .map(|f| {
            let t_honest = config.channel.transmittance_for(f);
            let t = t_honest * eve.extra_loss;
            let xi = config.channel.xi_a + eve.extra_xi;
            let det = &config.detector;
            let mut rng = stream_rng(seed, Stream::Channel, f as u64);
            let lo = f * per_frame;
            let hi = (lo + per_frame).min(n);
            let records = (lo..hi)
                .map(|i| {
                    let s = symbols[i];
                    let zeta = sample_with(constellation.states[s as usize], t, xi, det, &mut rng)
                        + (det.eta).sqrt() * eve.displacement;
                    SymbolRecord {
                        global_index: f as u64 * slots + (layout.signal_start() + (i - lo)) as u64,
                        frame_id: f as u32,
                        role: SlotRole::Signal,
                        alice_symbol: Some(s),
                        zeta: Some(zeta),
                        disclosed: disclosed[i],
                    }
                })
                .collect();

            let mut cal = stream_rng(seed, Stream::Calibration, f as u64);
            let (vac, detv) = calibrate_frame(layout.n_vacuum, det, &mut cal);
            let jitter: f64 = StandardNormal.sample(&mut cal);
            let monitor = t * (1.0 + MONITOR_NOISE * jitter);
            let calibration = FrameCalibration {
                frame_id: f as u32,
                vacuum_variance: vac,
                detector_variance: detv,
                nu_el: detv / (vac - detv),
                transmittance: monitor,
            };
            (records, calibration)
        })
        .collect();

    let mut records = Vec::with_capacity(n);
    let mut calibrations = Vec::with_capacity(n_frames);
    for (r, c) in frames {
        records.extend(r);
        calibrations.push(c);
    }
    let k_test = per_symbol_test.iter().sum();
    Ok(Exchange {
        constellation,
        records,
        stats: RunStatistics {
            n_total: n,
            k_test,
            n_key: n - k_test,
            per_symbol_test,
            per_symbol_total,
            frames: calibrations,
        },
    })
}

/// Vacuum-slot and blocked-input variances of one frame, in SNU. Vacuum
/// slots carry shot noise and electronic noise only.
fn calibrate_frame<R: Rng + ?Sized>(n_vacuum: usize, det: &DetectorModel, rng: &mut R) -> (f64, f64) {
    let n = n_vacuum.max(2);
    let sv = (0.5 * (1.0 + det.nu_el)).sqrt();
    let sd = (0.5 * det.nu_el).sqrt();
    let var = |s: f64, rng: &mut R| {
        let xs: Vec<f64> = (0..n)
            .flat_map(|_| {
                let z = gaussian_pair(rng, s);
                [z.re, z.im]
            })
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    (var(sv, rng), var(sd, rng))
}

/// `T_f = monitor_f / reference`.
pub fn estimate_transmission(monitor: &[f64], reference_power: f64) -> Result<Vec<f64>> {
    if !(reference_power > 0.0) {
        return Err(invalid(format!("reference power must be positive, got {reference_power}")));
    }
    Ok(monitor.iter().map(|m| m / reference_power).collect())
}
