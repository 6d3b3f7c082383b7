//! Carry-less arithmetic: GF(2)[x] products and the fields GF(2^128) and
//! GF(2^96) used by the confirmation and authentication hashes.

/// Software 64 x 64 carry-less product as `(low, high)`.
pub fn clmul64_soft(a: u64, b: u64) -> (u64, u64) {
    let (mut lo, mut hi) = (0u64, 0u64);
    for i in 0..64 {
        if (b >> i) & 1 == 1 {
            lo ^= a << i;
            if i > 0 {
                hi ^= a >> (64 - i);
            }
        }
    }
    (lo, hi)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq")]
unsafe fn clmul64_hw(a: u64, b: u64) -> (u64, u64) {
    use std::arch::x86_64::*;
    let r = _mm_clmulepi64_si128(_mm_set_epi64x(0, a as i64), _mm_set_epi64x(0, b as i64), 0x00);
    (_mm_cvtsi128_si64(r) as u64, _mm_extract_epi64(r, 1) as u64)
}

#[cfg(target_arch = "x86_64")]
fn has_clmul() -> bool {
    use std::sync::OnceLock;
    static HW: OnceLock<bool> = OnceLock::new();
    *HW.get_or_init(|| is_x86_feature_detected!("pclmulqdq") && is_x86_feature_detected!("sse4.1"))
}

/// 64 x 64 carry-less product, using the CPU instruction when present.
#[inline]
pub fn clmul64(a: u64, b: u64) -> (u64, u64) {
    #[cfg(target_arch = "x86_64")]
    {
        if has_clmul() {
            // SAFETY: the required CPU features were detected at runtime.
            return unsafe { clmul64_hw(a, b) };
        }
    }
    clmul64_soft(a, b)
}

const KARATSUBA_WORDS: usize = 32;

fn schoolbook(a: &[u64], b: &[u64], out: &mut [u64]) {
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let (lo, hi) = clmul64(x, y);
            out[i + j] ^= lo;
            out[i + j + 1] ^= hi;
        }
    }
}

/// Equal-length Karatsuba; `out` has `2 n` words and is accumulated into.
fn karatsuba(a: &[u64], b: &[u64], out: &mut [u64]) {
    let n = a.len();
    if n <= KARATSUBA_WORDS {
        schoolbook(a, b, out);
        return;
    }
    let h = n / 2;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let hi_len = n - h;
    let mut z0 = vec![0u64; 2 * h];
    let mut z2 = vec![0u64; 2 * hi_len];
    karatsuba(a0, b0, &mut z0);
    karatsuba(a1, b1, &mut z2);
    let mut sa = a1.to_vec();
    let mut sb = b1.to_vec();
    for i in 0..h {
        sa[i] ^= a0[i];
        sb[i] ^= b0[i];
    }
    let mut z1 = vec![0u64; 2 * hi_len];
    karatsuba(&sa, &sb, &mut z1);
    for (i, v) in z0.iter().enumerate() {
        z1[i] ^= v;
        out[i] ^= v;
    }
    for (i, v) in z2.iter().enumerate() {
        z1[i] ^= v;
        out[2 * h + i] ^= v;
    }
    for (i, v) in z1.iter().enumerate() {
        out[h + i] ^= v;
    }
}

/// Product of two GF(2)[x] polynomials given as little-endian words.
pub fn poly_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    if a.is_empty() || b.is_empty() {
        return out;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let n = short.len();
    if n <= KARATSUBA_WORDS {
        schoolbook(short, long, &mut out);
        return out;
    }
    // split the long operand into chunks of the short length
    let mut chunk = vec![0u64; 2 * n];
    for (c, piece) in long.chunks(n).enumerate() {
        let mut padded = piece.to_vec();
        padded.resize(n, 0);
        chunk.iter_mut().for_each(|w| *w = 0);
        karatsuba(short, &padded, &mut chunk);
        let base = c * n;
        for (i, v) in chunk.iter().enumerate() {
            if base + i < out.len() {
                out[base + i] ^= v;
            }
        }
    }
    out
}

/// Multiplication in GF(2^128) modulo `x^128 + x^7 + x^2 + x + 1`.
pub fn gf128_mul(a: u128, b: u128) -> u128 {
    let (a0, a1) = (a as u64, (a >> 64) as u64);
    let (b0, b1) = (b as u64, (b >> 64) as u64);
    let (l0, l1) = clmul64(a0, b0);
    let (h0, h1) = clmul64(a1, b1);
    let (m0, m1) = clmul64(a0 ^ a1, b0 ^ b1);
    let (m0, m1) = (m0 ^ l0 ^ h0, m1 ^ l1 ^ h1);
    let lo = (u128::from(l1 ^ m0) << 64) | u128::from(l0);
    let hi = (u128::from(h1) << 64) | u128::from(h0 ^ m1);
    reduce128(lo, hi)
}

fn reduce128(lo: u128, hi: u128) -> u128 {
    // x^128 = x^7 + x^2 + x + 1
    let fold = |h: u128| h ^ (h << 1) ^ (h << 2) ^ (h << 7);
    let spill = (hi >> 127) ^ (hi >> 126) ^ (hi >> 121);
    lo ^ fold(hi) ^ fold(spill)
}

pub const GF96_MASK: u128 = (1u128 << 96) - 1;

/// Multiplication in GF(2^96) modulo `x^96 + x^10 + x^9 + x^6 + 1`;
/// operands must be below `2^96`.
pub fn gf96_mul(a: u128, b: u128) -> u128 {
    debug_assert!(a <= GF96_MASK && b <= GF96_MASK);
    let (a0, a1) = (a as u64, (a >> 64) as u64);
    let (b0, b1) = (b as u64, (b >> 64) as u64);
    let (l0, l1) = clmul64(a0, b0);
    let (h0, _) = clmul64(a1, b1);
    let (c0, c1) = clmul64(a0, b1);
    let (d0, d1) = clmul64(a1, b0);
    // 192-bit product in three words
    let w0 = l0;
    let w1 = l1 ^ c0 ^ d0;
    let w2 = h0 ^ c1 ^ d1;
    let mut lo = (u128::from(w1) << 64) | u128::from(w0);
    let mut hi = u128::from(w2);
    // split at bit 96 and fold x^96 = x^10 + x^9 + x^6 + 1 until it fits
    let mut high = (hi << 32) | (lo >> 96);
    lo &= GF96_MASK;
    while high != 0 {
        let f = high ^ (high << 6) ^ (high << 9) ^ (high << 10);
        hi = f >> 96;
        lo ^= f & GF96_MASK;
        high = hi;
    }
    lo
}
