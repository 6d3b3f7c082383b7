//! Deterministic randomness streams.
//!
//! Every stochastic component draws from a ChaCha stream derived from a run
//! seed and a stream label, so frames and slots can be generated in any
//! order (or in parallel) and still reproduce bit-identical output.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StreamRng = ChaCha20Rng;

/// Stream labels. Distinct labels give statistically independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Symbols = 1,
    Channel = 2,
    Calibration = 3,
    TestSelection = 4,
    Equalization = 5,
    Dsp = 6,
}

/// RNG for `(seed, stream, index)`; `index` is typically a frame id.
pub fn stream_rng(seed: u64, stream: Stream, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    key[24..].copy_from_slice(b"cvqkd-v1");
    ChaCha20Rng::from_seed(key)
}
