//! Privacy amplification by Toeplitz hashing.

use crate::bits::PackedBits;
use crate::error::{expect_len, invalid, Result};
use crate::gf2::poly_mul;

/// Seed bits needed to compress `m` bits to `l`.
pub fn seed_len(m: usize, l: usize) -> usize {
    m + l - 1
}

/// Toeplitz matrix entry `T[i][j]` (an `l x m` matrix) from the seed: the
/// first `l` seed bits are the first column, the remaining `m - 1` the rest
/// of the first row.
pub fn toeplitz_entry(seed: &PackedBits, l: usize, i: usize, j: usize) -> u8 {
    if i >= j {
        seed.get(i - j)
    } else {
        seed.get(l - 1 + (j - i))
    }
}

fn check(key: &PackedBits, l: usize, seed: &PackedBits) -> Result<()> {
    let m = key.len();
    if l == 0 || l > m {
        return Err(invalid(format!("output length {l} must lie in 1..={m}")));
    }
    expect_len(seed_len(m, l), seed.len())
}

/// `T(seed) key` over GF(2), via one polynomial product.
pub fn privacy_amplify(key: &PackedBits, l: usize, seed: &PackedBits) -> Result<PackedBits> {
    check(key, l, seed)?;
    let m = key.len();
    // diagonal d = i - j + m - 1 carries coefficient c[d]
    let mut diag = PackedBits::zeros(m + l - 1);
    for d in 0..m + l - 1 {
        let v = if d + 1 >= m { seed.get(d + 1 - m) } else { seed.get(l - 1 + (m - 1 - d)) };
        diag.set(d, v);
    }
    let prod = poly_mul(diag.words(), key.words());
    let prod = PackedBits::from_words(prod, 2 * (m + l) + 128);
    Ok(prod.slice(m - 1, l))
}

/// Direct matrix-vector product; the oracle for [`privacy_amplify`].
pub fn privacy_amplify_naive(key: &PackedBits, l: usize, seed: &PackedBits) -> Result<PackedBits> {
    check(key, l, seed)?;
    let mut out = PackedBits::zeros(l);
    for i in 0..l {
        let mut acc = 0u8;
        for j in 0..key.len() {
            acc ^= toeplitz_entry(seed, l, i, j) & key.get(j);
        }
        out.set(i, acc);
    }
    Ok(out)
}
