//! Physical conventions, the QPSK constellation, Stokes algebra and Alice's
//! reduced source state.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Shot-noise-unit convention shared by every module.
///
/// A heterodyne outcome `zeta` of a coherent state `|gamma>` seen by an ideal
/// detector has independent Gaussian real and imaginary parts with means
/// `(Re gamma, Im gamma)` and variance one half each. One SNU of added noise
/// (electronic noise `nu_el`) contributes `nu/2` per quadrature at the
/// heterodyne output. Excess noise `xi` referenced at the channel input is a
/// homodyne-scale quantity: it raises a single quadrature's variance by
/// `xi/2` in these units, i.e. a thermal occupation of `xi/2` photons.
pub mod snu {
    /// Per-quadrature variance of an ideal heterodyne outcome on vacuum.
    pub const VACUUM_QUADRATURE_VARIANCE: f64 = 0.5;

    /// Mean thermal photon number corresponding to homodyne-scale excess noise.
    pub fn excess_noise_to_photons(xi: f64) -> f64 {
        xi / 2.0
    }

    /// Inverse of [`excess_noise_to_photons`].
    pub fn photons_to_excess_noise(n: f64) -> f64 {
        2.0 * n
    }
}

/// Phase convention for the constellation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// States centred in the quadrants, `exp(i(pi/4 + j pi/2))`.
    #[default]
    QuadrantCentered,
    /// States on the axes, `exp(i j pi/2)`.
    AxisAligned,
}

impl PhaseConvention {
    pub fn offset(self) -> f64 {
        match self {
            PhaseConvention::QuadrantCentered => FRAC_PI_4,
            PhaseConvention::AxisAligned => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpskConstellation {
    pub amplitude: f64,
    pub phase_offset: f64,
    pub states: [Complex64; 4],
}

impl QpskConstellation {
    pub fn new(amplitude: f64, phase_offset: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(invalid(format!("amplitude must be >= 0, got {amplitude}")));
        }
        let states = std::array::from_fn(|j| {
            Complex64::from_polar(amplitude, phase_offset + j as f64 * FRAC_PI_2)
        });
        Ok(Self { amplitude, phase_offset, states })
    }

    pub fn with_convention(amplitude: f64, convention: PhaseConvention) -> Result<Self> {
        Self::new(amplitude, convention.offset())
    }

    /// Arbitrary measured states (e.g. a characterised, slightly distorted
    /// constellation). `amplitude` is reported as the mean modulus.
    pub fn from_states(states: [Complex64; 4]) -> Self {
        let amplitude = states.iter().map(|s| s.norm()).sum::<f64>() / 4.0;
        Self { amplitude, phase_offset: states[0].arg(), states }
    }

    /// Same constellation scaled by a real factor, e.g. `sqrt(T eta)`.
    pub fn scaled(&self, factor: f64) -> [Complex64; 4] {
        self.states.map(|s| s * factor)
    }
}

pub fn qpsk_constellation(amplitude: f64, phase_offset: f64) -> Result<QpskConstellation> {
    QpskConstellation::new(amplitude, phase_offset)
}

/// Link parameters: channel transmittance, receiver efficiency, trusted
/// electronic noise (SNU), channel-input excess noise (SNU) and the
/// modulation amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub transmittance: f64,
    pub efficiency: f64,
    pub nu_el: f64,
    pub xi_a: f64,
    pub amplitude: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must lie in (0, 1], got {v}")))
            }
        };
        unit("transmittance", self.transmittance)?;
        unit("efficiency", self.efficiency)?;
        for (name, v) in [("nu_el", self.nu_el), ("xi_a", self.xi_a), ("amplitude", self.amplitude)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// `<b|a>` for coherent states.
pub fn coherent_overlap(a: Complex64, b: Complex64) -> Complex64 {
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + b.conj() * a).exp()
}

/// Alice's reduced density matrix `(rho_A)_{jk} = sqrt(p_j p_k) <alpha_k|alpha_j>`
/// of the source purification `sum_j sqrt(p_j) |j>|alpha_j>`.
pub fn alice_reduced_state(c: &QpskConstellation, probs: [f64; 4]) -> Result<Matrix4<Complex64>> {
    alice_reduced_state_from(&c.states, probs)
}

pub fn alice_reduced_state_from(states: &[Complex64; 4], probs: [f64; 4]) -> Result<Matrix4<Complex64>> {
    let total: f64 = probs.iter().sum();
    if probs.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("symbol priors must be a distribution, sum = {total}")));
    }
    Ok(Matrix4::from_fn(|j, k| {
        (probs[j] * probs[k]).sqrt() * coherent_overlap(states[j], states[k])
    }))
}

pub const UNIFORM_PRIORS: [f64; 4] = [0.25; 4];

/// Two-mode product coherent state: bright LO in the left-circular mode,
/// signal in the right-circular mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeCoherent {
    pub alpha_lo: Complex64,
    pub alpha_sig: Complex64,
}

impl TwoModeCoherent {
    pub const MIN_LO_RATIO: f64 = 100.0;

    /// False when the LO is not bright enough for the quadrature
    /// approximation (`|alpha_LO| / |alpha_sig| < 100`).
    pub fn lo_is_bright(&self) -> bool {
        let ratio = self.alpha_lo.norm() / self.alpha_sig.norm();
        let ok = ratio >= Self::MIN_LO_RATIO;
        if !ok {
            log::warn!("LO/signal amplitude ratio {ratio:.1} below {}", Self::MIN_LO_RATIO);
        }
        ok
    }
}

/// Means and variances of `S_0..S_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesMoments {
    pub mean: [f64; 4],
    pub variance: [f64; 4],
}

/// Exact coherent-state Stokes moments in the circular basis
/// (`S_1 = a_L^+ a_R + a_R^+ a_L`, `S_2 = i(a_R^+ a_L - a_L^+ a_R)`,
/// `S_3 = n_L - n_R`). For a product coherent state every Stokes variance
/// equals `<S_0>`.
pub fn stokes_moments(state: &TwoModeCoherent) -> StokesMoments {
    let nl = state.alpha_lo.norm_sqr();
    let nr = state.alpha_sig.norm_sqr();
    let cross = state.alpha_lo.conj() * state.alpha_sig;
    let s0 = nl + nr;
    StokesMoments {
        mean: [s0, 2.0 * cross.re, 2.0 * cross.im, nl - nr],
        variance: [s0; 4],
    }
}

/// Invert `S_1 ~ sqrt(2)|alpha_L| X`, `S_2 ~ sqrt(2)|alpha_L| P` to a
/// heterodyne-scaled outcome `zeta = (s1 + i s2) / (sqrt(2) lo)`.
///
/// `lo_amplitude` is the LO amplitude reaching each Stokes detector, so
/// with a 50:50 split ahead of the two detectors it is `|alpha_LO|/sqrt(2)`.
pub fn quadrature_from_stokes(s1: f64, s2: f64, lo_amplitude: f64) -> Result<Complex64> {
    if !(lo_amplitude > 0.0) {
        return Err(invalid(format!("LO amplitude must be positive, got {lo_amplitude}")));
    }
    Ok(Complex64::new(s1, s2) / (std::f64::consts::SQRT_2 * lo_amplitude))
}

/// One shot of dual Stokes detection: the beam is split 50:50, `S_1` is
/// measured on one arm and `S_2` on the other.
///
/// Each Stokes value is a difference of photon counts in a rotated mode
/// basis (`S_1 = n_+ - n_-` with `a_± = (a_L ± a_R)/sqrt 2`,
/// `S_2 = n_b- - n_b+` with `b_± = (a_L ± i a_R)/sqrt 2`), and those counts
/// are independent Poisson variables for coherent inputs.
pub fn dual_stokes_sample<R: Rng + ?Sized>(state: &TwoModeCoherent, rng: &mut R) -> (f64, f64) {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let l = state.alpha_lo * half;
    let r = state.alpha_sig * half;
    let i = Complex64::i();
    let count = |mean: f64, rng: &mut R| -> f64 {
        if mean <= 0.0 {
            0.0
        } else {
            Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(0.0)
        }
    };
    let s1 = count((l + r).norm_sqr() / 2.0, rng) - count((l - r).norm_sqr() / 2.0, rng);
    let s2 = count((l - i * r).norm_sqr() / 2.0, rng) - count((l + i * r).norm_sqr() / 2.0, rng);
    (s1, s2)
}
