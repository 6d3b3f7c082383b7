//! Burst waveform synthesis and per-slot quadrature recovery.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const MODULATION_SAMPLE_RATE: f64 = 2.0e9;
pub const ACQUISITION_SAMPLE_RATE: f64 = 1.25e9;
pub const HIGH_PASS_CUTOFF: f64 = 130e3;
pub const DEFAULT_SYNC_FLOOR: f64 = 0.5;

/// Sampled pulse envelope of one slot window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub sigma: f64,
    pub sample_rate: f64,
    pub window: f64,
    pub samples: Vec<f64>,
}

impl PulseShape {
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|w| w * w).sum()
    }

    /// Sample times relative to the window centre. The midpoint grid keeps
    /// the sampled pulse exactly odd about the centre.
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples.len();
        (0..n).map(|k| sample_offset(k, n) / self.sample_rate).collect()
    }
}

fn sample_offset(k: usize, n: usize) -> f64 {
    k as f64 + 0.5 - n as f64 / 2.0
}

/// `Gamma(t) = sqrt(e) (t / sigma) exp(-t^2 / (2 sigma^2))`, unit peak at `t = sigma`.
pub fn hermite_gamma(t: f64, sigma: f64) -> f64 {
    let u = t / sigma;
    std::f64::consts::E.sqrt() * u * (-0.5 * u * u).exp()
}

fn sampled_pulse(sigma: f64, sample_rate: f64, window: f64, f: impl Fn(f64) -> f64) -> Result<PulseShape> {
    if !(sigma > 0.0 && sample_rate > 0.0) {
        return Err(invalid("sigma and sample rate must be positive"));
    }
    if window < 6.0 * sigma * (1.0 - 1e-12) {
        return Err(invalid(format!("window {window:e} s shorter than 6 sigma = {:e} s", 6.0 * sigma)));
    }
    let n = (window * sample_rate).round() as usize;
    if n < 2 {
        return Err(invalid("pulse window holds fewer than two samples"));
    }
    let samples = (0..n).map(|k| f(sample_offset(k, n) / sample_rate)).collect();
    Ok(PulseShape { sigma, sample_rate, window, samples })
}

/// First-order Hermite-Gaussian pulse sampled on the window. The envelope
/// itself has unit peak, so pulses sampled at different rates describe the
/// same waveform.
pub fn hermite_pulse(sigma: f64, sample_rate: f64, window: f64) -> Result<PulseShape> {
    sampled_pulse(sigma, sample_rate, window, |t| hermite_gamma(t, sigma))
}

/// Plain Gaussian envelope of the same width, used as a spectral reference.
pub fn gaussian_pulse(sigma: f64, sample_rate: f64, window: f64) -> Result<PulseShape> {
    sampled_pulse(sigma, sample_rate, window, |t| (-0.5 * (t / sigma).powi(2)).exp())
}

/// Fraction of the isolated pulse's spectral energy in `|f| < cutoff`.
///
/// The discrete-time spectrum `X(f) = sum_k x_k exp(-2 pi i f t_k)` is
/// integrated over `[0, cutoff]` and divided by the one-sided total, which
/// by Parseval is `fs/2 * sum x_k^2`.
pub fn lowfreq_energy_fraction(pulse: &PulseShape, cutoff: f64) -> Result<f64> {
    let fs = pulse.sample_rate;
    if !(cutoff >= 0.0 && cutoff < fs / 2.0) {
        return Err(invalid(format!("cutoff {cutoff} outside [0, fs/2)")));
    }
    if cutoff == 0.0 {
        return Ok(0.0);
    }
    let times = pulse.times();
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (x, t) in pulse.samples.iter().zip(&times) {
            let ph = -2.0 * PI * f * t;
            re += x * ph.cos();
            im += x * ph.sin();
        }
        re * re + im * im
    };
    // composite Simpson on an even number of panels
    let panels = 2048;
    let h = cutoff / panels as f64;
    let mut acc = power(0.0) + power(cutoff);
    for k in 1..panels {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * power(k as f64 * h);
    }
    let band = acc * h / 3.0;
    Ok(band / (fs / 2.0 * pulse.energy()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum SlotRole {
    Reference = 0,
    Guard = 1,
    Signal = 2,
    Vacuum = 3,
}

impl SlotRole {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(SlotRole::Reference),
            1 => Some(SlotRole::Guard),
            2 => Some(SlotRole::Signal),
            3 => Some(SlotRole::Vacuum),
            _ => None,
        }
    }
}

/// Slot layout of one frame: reference, guard, signal and vacuum blocks in
/// that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub n_reference: usize,
    pub n_guard: usize,
    pub n_signal: usize,
    pub n_vacuum: usize,
    pub symbol_rate: f64,
    pub frames_per_burst: usize,
}

impl Default for FrameLayout {
    fn default() -> Self {
        Self {
            n_reference: 20,
            n_guard: 480,
            n_signal: 1000,
            n_vacuum: 1000,
            symbol_rate: 25e6,
            frames_per_burst: 240,
        }
    }
}

impl FrameLayout {
    pub fn slots_per_frame(&self) -> usize {
        self.n_reference + self.n_guard + self.n_signal + self.n_vacuum
    }

    pub fn slot_duration(&self) -> f64 {
        1.0 / self.symbol_rate
    }

    pub fn frame_duration(&self) -> f64 {
        self.slots_per_frame() as f64 * self.slot_duration()
    }

    pub fn signal_start(&self) -> usize {
        self.n_reference + self.n_guard
    }

    pub fn vacuum_start(&self) -> usize {
        self.signal_start() + self.n_signal
    }

    pub fn role_of(&self, slot: usize) -> SlotRole {
        let slot = slot % self.slots_per_frame();
        if slot < self.n_reference {
            SlotRole::Reference
        } else if slot < self.signal_start() {
            SlotRole::Guard
        } else if slot < self.vacuum_start() {
            SlotRole::Signal
        } else {
            SlotRole::Vacuum
        }
    }

    pub fn samples_per_slot(&self, sample_rate: f64) -> Result<usize> {
        let s = sample_rate / self.symbol_rate;
        if (s - s.round()).abs() > 1e-9 || s < 1.0 {
            return Err(invalid(format!("sample rate {sample_rate} is not a multiple of the symbol rate")));
        }
        Ok(s.round() as usize)
    }
}

/// Signs of the bright reference block: Barker-13 followed by Barker-7.
pub const REFERENCE_PATTERN: [f64; 20] = [
    1.0, 1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, //
    1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0,
];

fn check_pulse_fits(layout: &FrameLayout, pulse: &PulseShape) -> Result<usize> {
    let sps = layout.samples_per_slot(pulse.sample_rate)?;
    if pulse.samples.len() != sps {
        return Err(Error::SizeMismatch { expected: sps, actual: pulse.samples.len() });
    }
    Ok(sps)
}

/// Waveform of the reference block alone.
pub fn reference_waveform(layout: &FrameLayout, pulse: &PulseShape, amplitude: f64) -> Result<Vec<f64>> {
    check_pulse_fits(layout, pulse)?;
    let mut out = Vec::with_capacity(layout.n_reference * pulse.samples.len());
    for k in 0..layout.n_reference {
        let a = amplitude * REFERENCE_PATTERN[k % REFERENCE_PATTERN.len()];
        out.extend(pulse.samples.iter().map(|w| a * w));
    }
    Ok(out)
}

/// One quadrature's drive trace for a burst: `frames[f][k]` is the amplitude
/// of the k-th signal slot of frame f. Guard and vacuum slots are zero.
pub fn build_burst(
    frames: &[Vec<f64>],
    layout: &FrameLayout,
    pulse: &PulseShape,
    reference_amplitude: f64,
) -> Result<Vec<f64>> {
    let sps = check_pulse_fits(layout, pulse)?;
    let frame_len = layout.slots_per_frame() * sps;
    let reference = reference_waveform(layout, pulse, reference_amplitude)?;
    let mut trace = vec![0.0; frames.len() * frame_len];
    for (f, amps) in frames.iter().enumerate() {
        if amps.len() != layout.n_signal {
            return Err(Error::SizeMismatch { expected: layout.n_signal, actual: amps.len() });
        }
        let base = f * frame_len;
        trace[base..base + reference.len()].copy_from_slice(&reference);
        for (k, a) in amps.iter().enumerate() {
            let start = base + (layout.signal_start() + k) * sps;
            for (dst, w) in trace[start..start + sps].iter_mut().zip(&pulse.samples) {
                *dst = a * w;
            }
        }
    }
    Ok(trace)
}

/// Offset (in samples) that maximises normalised cross-correlation with the
/// reference waveform. Offsets in `[0, search_len)` are scanned, ties go to
/// the smallest offset.
pub fn synchronize(trace: &[f64], reference: &[f64], search_len: usize, floor: f64) -> Result<usize> {
    if reference.is_empty() || trace.len() < reference.len() {
        return Err(invalid("trace shorter than the reference waveform"));
    }
    let ref_norm = reference.iter().map(|r| r * r).sum::<f64>().sqrt();
    if ref_norm == 0.0 {
        return Err(invalid("reference waveform is identically zero"));
    }
    let last = (trace.len() - reference.len() + 1).min(search_len.max(1));
    let (offset, peak) = (0..last)
        .into_par_iter()
        .map(|o| {
            let seg = &trace[o..o + reference.len()];
            let (mut dot, mut e) = (0.0, 0.0);
            for (r, t) in reference.iter().zip(seg) {
                dot += r * t;
                e += t * t;
            }
            let c = if e > 0.0 { dot / (ref_norm * e.sqrt()) } else { 0.0 };
            (o, c)
        })
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        );
    if peak < floor {
        return Err(Error::SyncFailure { peak, floor });
    }
    Ok(offset)
}

/// Per-slot weighted averages `sum w x / sum w^2` over every complete frame
/// that starts at or after `offset`.
pub fn matched_filter(trace: &[f64], pulse: &PulseShape, layout: &FrameLayout, offset: usize) -> Result<Vec<f64>> {
    let sps = check_pulse_fits(layout, pulse)?;
    let frame_len = layout.slots_per_frame() * sps;
    let avail = trace.len().saturating_sub(offset);
    if avail < frame_len {
        return Err(Error::SizeMismatch { expected: offset + frame_len, actual: trace.len() });
    }
    let frames = avail / frame_len;
    let norm = pulse.energy();
    let body = &trace[offset..offset + frames * frame_len];
    Ok(body
        .par_chunks(frame_len)
        .flat_map_iter(|frame| {
            frame.chunks(sps).map(|slot| {
                slot.iter().zip(&pulse.samples).map(|(x, w)| x * w).sum::<f64>() / norm
            })
        })
        .collect())
}

/// Single-pole high-pass `y[n] = a (y[n-1] + x[n] - x[n-1])`.
pub fn high_pass(trace: &[f64], cutoff: f64, sample_rate: f64) -> Vec<f64> {
    let rc = 1.0 / (2.0 * PI * cutoff);
    let dt = 1.0 / sample_rate;
    let a = rc / (rc + dt);
    let mut out = Vec::with_capacity(trace.len());
    let (mut y, mut prev) = (0.0, 0.0);
    for (i, &x) in trace.iter().enumerate() {
        y = if i == 0 { x } else { a * (y + x - prev) };
        prev = x;
        out.push(y);
    }
    out
}

/// Blackman-windowed sinc interpolation between sample grids. Sample `i` of
/// a trace at rate `fs` is taken to represent time `(i + 1/2) / fs`, which
/// keeps slot-centred pulses centred after resampling.
pub fn resample(trace: &[f64], fs_in: f64, fs_out: f64) -> Vec<f64> {
    const HALF_TAPS: f64 = 24.0;
    let duration = trace.len() as f64 / fs_in;
    let n_out = (duration * fs_out).round() as usize;
    let fc = 0.9 * fs_in.min(fs_out) / 2.0;
    let gain = 2.0 * fc / fs_in;
    // kernel half-width in input samples
    let half = HALF_TAPS * fs_in / (2.0 * fc);
    (0..n_out)
        .into_par_iter()
        .map(|j| {
            let t = (j as f64 + 0.5) / fs_out;
            let centre = t * fs_in - 0.5;
            let lo = ((centre - half).ceil().max(0.0)) as usize;
            let hi = ((centre + half).floor() as isize).min(trace.len() as isize - 1);
            let mut acc = 0.0;
            if hi >= lo as isize {
                for i in lo..=hi as usize {
                    let d = i as f64 - centre;
                    let x = 2.0 * fc / fs_in * d;
                    let sinc = if x.abs() < 1e-12 { 1.0 } else { (PI * x).sin() / (PI * x) };
                    let u = (d / half + 1.0) / 2.0;
                    let win = 0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos();
                    acc += trace[i] * sinc * win;
                }
            }
            acc * gain
        })
        .collect()
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    /// Signal values in SNU, offset by the vacuum mean.
    pub values: Vec<f64>,
    pub scale: f64,
    pub nu_el: f64,
}

pub const MIN_CALIBRATION_SAMPLES: usize = 100;

/// Per-frame shot-noise normalisation from vacuum and detector-only slots.
pub fn normalize_shot_noise(signal: &[f64], vacuum: &[f64], detector: &[f64]) -> Result<Normalized> {
    if vacuum.len() < MIN_CALIBRATION_SAMPLES || detector.len() < MIN_CALIBRATION_SAMPLES {
        return Err(Error::Calibration(format!(
            "need {MIN_CALIBRATION_SAMPLES} vacuum and detector samples, got {} and {}",
            vacuum.len(),
            detector.len()
        )));
    }
    let (vac_mean, vac_var) = mean_var(vacuum);
    let (_, det_var) = mean_var(detector);
    let shot = vac_var - det_var;
    if !(shot > 0.0) {
        return Err(Error::Calibration(format!(
            "vacuum variance {vac_var:e} does not exceed detector variance {det_var:e}"
        )));
    }
    let scale = 1.0 / (2.0 * shot).sqrt();
    Ok(Normalized {
        values: signal.iter().map(|x| (x - vac_mean) * scale).collect(),
        scale,
        nu_el: det_var / shot,
    })
}

/// Adds white Gaussian noise to the quieter stream so both report the same
/// electronic noise. Returns the streams and the common `nu_el`.
pub fn equalize_detectors<R: Rng + ?Sized>(
    vals_x: &[f64],
    vals_p: &[f64],
    nu_x: f64,
    nu_p: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if !(nu_x >= 0.0 && nu_p >= 0.0) {
        return Err(invalid("electronic noise must be non-negative"));
    }
    let mut x = vals_x.to_vec();
    let mut p = vals_p.to_vec();
    let diff = (nu_x - nu_p).abs() / 2.0;
    if diff > 0.0 {
        let normal = Normal::new(0.0, diff.sqrt()).map_err(|e| invalid(e.to_string()))?;
        let target = if nu_x < nu_p { &mut x } else { &mut p };
        target.iter_mut().for_each(|v| *v += normal.sample(rng));
    }
    Ok((x, p, nu_x.max(nu_p)))
}
