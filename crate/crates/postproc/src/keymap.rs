//! Quadrant key map with a bounded detection range.

use cvqkd_core::stats::sign_bit;
use cvqkd_core::Complex64;
use serde::{Deserialize, Serialize};

/// Two key bits from the projection on the axes: a bit is 0 for a positive
/// coordinate and 1 for a negative one; an exact zero gives 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyValue {
    pub x: u8,
    pub p: u8,
}

impl KeyValue {
    /// Quadrant index counted anticlockwise from `(+, +)`.
    pub fn quadrant(self) -> u8 {
        match (self.x, self.p) {
            (0, 0) => 0,
            (1, 0) => 1,
            (1, 1) => 2,
            _ => 3,
        }
    }

    pub fn from_quadrant(z: u8) -> Self {
        match z % 4 {
            0 => Self { x: 0, p: 0 },
            1 => Self { x: 1, p: 0 },
            2 => Self { x: 1, p: 1 },
            _ => Self { x: 0, p: 1 },
        }
    }
}

/// `None` is the discard outcome: `|zeta| > m_range` or `|zeta| < delta_r`.
pub fn key_map(zeta: Complex64, m_range: f64, delta_r: f64) -> Option<KeyValue> {
    let r = zeta.norm();
    if r > m_range || r < delta_r {
        return None;
    }
    Some(KeyValue { x: sign_bit(zeta.re), p: sign_bit(zeta.im) })
}

/// Bit streams of the kept rounds with their indices into `outcomes`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyStreams {
    pub indices: Vec<usize>,
    pub x: Vec<u8>,
    pub p: Vec<u8>,
}

pub fn map_outcomes(outcomes: &[Complex64], m_range: f64, delta_r: f64) -> KeyStreams {
    let mut out = KeyStreams::default();
    for (i, &z) in outcomes.iter().enumerate() {
        if let Some(k) = key_map(z, m_range, delta_r) {
            out.indices.push(i);
            out.x.push(k.x);
            out.p.push(k.p);
        }
    }
    out
}

/// Alice's bits for her prepared symbols, using the same projection on the
/// constellation points.
pub fn symbol_bits(states: &[Complex64; 4], symbols: &[u8]) -> (Vec<u8>, Vec<u8>) {
    symbols.iter().map(|&j| (sign_bit(states[j as usize].re), sign_bit(states[j as usize].im))).unzip()
}
