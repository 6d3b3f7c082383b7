//! Transcript authentication with a polynomial hash over GF(2^96) and a
//! one-time pad.

use crate::error::{invalid, Result};
use crate::gf2::{gf96_mul, GF96_MASK};

/// Tag size in bits.
pub const TAG_BITS: u32 = 96;
pub const TAG_BYTES: usize = 12;
/// Pre-shared secret: hash point and pad, 96 bits each.
pub const SECRET_BYTES: usize = 2 * TAG_BYTES;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthContext {
    point: u128,
    pad: u128,
    acc: u128,
    bits: u64,
}

fn le96(b: &[u8]) -> u128 {
    b.iter().enumerate().fold(0u128, |a, (i, &v)| a | (u128::from(v) << (8 * i))) & GF96_MASK
}

impl AuthContext {
    pub fn new(secret: &[u8]) -> Result<Self> {
        if secret.len() != SECRET_BYTES {
            return Err(invalid(format!("authentication secret must be {SECRET_BYTES} bytes")));
        }
        Ok(Self { point: le96(&secret[..TAG_BYTES]), pad: le96(&secret[TAG_BYTES..]), acc: 0, bits: 0 })
    }

    fn absorb_chunk(&mut self, chunk: u128) {
        self.acc = gf96_mul(self.acc ^ chunk, self.point);
    }

    /// Folds one framed message in; the frame carries type and length so
    /// the transcript encoding is injective.
    pub fn absorb(&mut self, kind: u8, payload: &[u8]) {
        let mut head = [0u8; 5];
        head[0] = kind;
        head[1..].copy_from_slice(&(payload.len() as u32).to_be_bytes());
        let framed = head.iter().chain(payload).copied().collect::<Vec<u8>>();
        for chunk in framed.chunks(TAG_BYTES) {
            self.absorb_chunk(le96(chunk));
        }
        self.bits += 8 * framed.len() as u64;
    }

    /// Transcript length folded in so far.
    pub fn transcript_bits(&self) -> u64 {
        self.bits
    }

    pub fn tag(&self) -> [u8; TAG_BYTES] {
        let t = gf96_mul(self.acc ^ u128::from(self.bits), self.point) ^ self.pad;
        let mut out = [0u8; TAG_BYTES];
        for (i, b) in out.iter_mut().enumerate() {
            *b = (t >> (8 * i)) as u8;
        }
        out
    }
}

/// `epsilon_auth = (c / a) 2^-a` for a transcript of `c` bits.
pub fn epsilon_auth(c_bits: f64, a: u32) -> f64 {
    c_bits / f64::from(a) * 2f64.powi(-(a as i32))
}
