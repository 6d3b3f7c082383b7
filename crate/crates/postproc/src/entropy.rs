//! Randomness for seeds and hash keys: a seeded deterministic stream that
//! stands in for the physical generator, or bytes read from a file.

use std::io::Read;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::PackedBits;
use crate::error::{Error, Result};

pub enum EntropySource {
    Seeded(ChaCha20Rng),
    File(Box<dyn Read + Send>),
}

impl EntropySource {
    pub fn seeded(seed: u64, label: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&label.to_le_bytes());
        key[16..].copy_from_slice(b"cvqkd-postproc-1");
        Self::Seeded(ChaCha20Rng::from_seed(key))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::File(Box::new(std::io::BufReader::new(std::fs::File::open(path)?))))
    }

    pub fn fill(&mut self, out: &mut [u8]) -> Result<()> {
        match self {
            Self::Seeded(r) => {
                r.fill_bytes(out);
                Ok(())
            }
            Self::File(f) => f.read_exact(out).map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => Error::Abort("entropy file exhausted".into()),
                _ => Error::Io(e),
            }),
        }
    }

    pub fn u128(&mut self) -> Result<u128> {
        let mut b = [0u8; 16];
        self.fill(&mut b)?;
        Ok(u128::from_le_bytes(b))
    }

    pub fn bits(&mut self, n: usize) -> Result<PackedBits> {
        let mut b = vec![0u8; n.div_ceil(8)];
        self.fill(&mut b)?;
        Ok(PackedBits::from_bytes(&b, n))
    }
}
