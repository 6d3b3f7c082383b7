//! Fixed-width little-endian symbol records and their JSON sidecar.
//!
//! Record layout (31 bytes):
//!
//! | offset | type | field |
//! |-------:|------|-------|
//! | 0  | u64 | global slot index |
//! | 8  | u32 | frame id |
//! | 12 | u8  | slot role (0 reference, 1 guard, 2 signal, 3 vacuum) |
//! | 13 | u8  | Alice's symbol, 255 if none |
//! | 14 | f64 | Re zeta |
//! | 22 | f64 | Im zeta |
//! | 30 | u8  | flags: bit 0 zeta present, bit 1 disclosed |

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{de::DeserializeOwned, Serialize};

use crate::dsp::SlotRole;
use crate::error::{Error, Result};

pub const RECORD_BYTES: usize = 31;
const NO_SYMBOL: u8 = 255;
const FLAG_ZETA: u8 = 1;
const FLAG_DISCLOSED: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRecord {
    pub global_index: u64,
    pub frame_id: u32,
    pub role: SlotRole,
    pub alice_symbol: Option<u8>,
    pub zeta: Option<Complex64>,
    pub disclosed: bool,
}

impl SymbolRecord {
    pub fn to_bytes(&self) -> [u8; RECORD_BYTES] {
        let mut b = [0u8; RECORD_BYTES];
        b[0..8].copy_from_slice(&self.global_index.to_le_bytes());
        b[8..12].copy_from_slice(&self.frame_id.to_le_bytes());
        b[12] = self.role as u8;
        b[13] = self.alice_symbol.unwrap_or(NO_SYMBOL);
        let z = self.zeta.unwrap_or_default();
        b[14..22].copy_from_slice(&z.re.to_le_bytes());
        b[22..30].copy_from_slice(&z.im.to_le_bytes());
        b[30] = if self.zeta.is_some() { FLAG_ZETA } else { 0 } | if self.disclosed { FLAG_DISCLOSED } else { 0 };
        b
    }

    pub fn from_bytes(b: &[u8; RECORD_BYTES]) -> Result<Self> {
        let u64_at = |o: usize| u64::from_le_bytes(b[o..o + 8].try_into().expect("slice of 8"));
        let role = SlotRole::from_code(b[12]).ok_or_else(|| Error::Format(format!("bad slot role {}", b[12])))?;
        let alice_symbol = match b[13] {
            NO_SYMBOL => None,
            s @ 0..=3 => Some(s),
            s => return Err(Error::Format(format!("bad symbol {s}"))),
        };
        if (role == SlotRole::Signal) != alice_symbol.is_some() {
            return Err(Error::Format("symbol must be present exactly on signal slots".into()));
        }
        let flags = b[30];
        if flags & !(FLAG_ZETA | FLAG_DISCLOSED) != 0 {
            return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
        }
        let zeta = (flags & FLAG_ZETA != 0)
            .then(|| Complex64::new(f64::from_bits(u64_at(14)), f64::from_bits(u64_at(22))));
        Ok(Self {
            global_index: u64_at(0),
            frame_id: u32::from_le_bytes(b[8..12].try_into().expect("slice of 4")),
            role,
            alice_symbol,
            zeta,
            disclosed: flags & FLAG_DISCLOSED != 0,
        })
    }
}

pub fn write_records<W: Write>(mut w: W, records: &[SymbolRecord]) -> Result<()> {
    for r in records {
        w.write_all(&r.to_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(mut r: R) -> Result<Vec<SymbolRecord>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(Error::Format(format!(
            "record stream length {} is not a multiple of {RECORD_BYTES}",
            bytes.len()
        )));
    }
    bytes
        .chunks_exact(RECORD_BYTES)
        .map(|c| SymbolRecord::from_bytes(c.try_into().expect("exact chunk")))
        .collect()
}

pub fn write_sidecar<W: Write, T: Serialize>(w: W, meta: &T) -> Result<()> {
    serde_json::to_writer_pretty(w, meta)?;
    Ok(())
}

pub fn read_sidecar<R: Read, T: DeserializeOwned>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}
