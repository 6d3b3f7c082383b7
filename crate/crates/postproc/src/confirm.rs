//! Block confirmation by a polynomial universal hash over GF(2^128).

use crate::bits::PackedBits;
use crate::error::{expect_len, Result};
use crate::gf2::gf128_mul;

/// `sum_i m_i k^(L - i + 1)` over 128-bit chunks, followed by a length
/// chunk. Two distinct equal-length inputs collide with probability at most
/// `(L + 1) / 2^128` over a uniform key.
pub fn poly_hash128(bits: &PackedBits, key: u128) -> u128 {
    let w = bits.words();
    let mut acc = 0u128;
    for pair in w.chunks(2) {
        let chunk = u128::from(pair[0]) | (u128::from(*pair.get(1).unwrap_or(&0)) << 64);
        acc = gf128_mul(acc ^ chunk, key);
    }
    gf128_mul(acc ^ bits.len() as u128, key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Confirmation {
    Ok,
    Mismatch,
}

/// Compares the hashes of both blocks under the shared `key`.
pub fn confirm(alice: &PackedBits, bob: &PackedBits, key: u128) -> Result<Confirmation> {
    expect_len(bob.len(), alice.len())?;
    Ok(if poly_hash128(alice, key) == poly_hash128(bob, key) { Confirmation::Ok } else { Confirmation::Mismatch })
}

/// `epsilon_cor = (m / t) 2^-t`.
pub fn epsilon_cor(m_bits: f64, t: u32) -> f64 {
    m_bits / f64::from(t) * 2f64.powi(-(t as i32))
}
