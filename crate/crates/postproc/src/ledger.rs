//! Per-block reconciliation ledger and error-correction leak accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confirmation hash length in bits.
pub const CONFIRM_BITS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamId {
    X,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockStatus {
    Pending,
    /// Decoder met the syndrome; awaiting confirmation.
    Corrected,
    /// Decoder gave up or confirmation failed; awaiting disclosure.
    Failed,
    Confirmed,
    /// Openly exchanged after a failure.
    Disclosed,
}

impl BlockStatus {
    pub fn is_resolved(self) -> bool {
        matches!(self, Self::Confirmed | Self::Disclosed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub stream: StreamId,
    pub index: usize,
    pub status: BlockStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLedger {
    pub l_in: usize,
    pub l_syn: usize,
    pub confirm_bits: usize,
    pub blocks: Vec<BlockEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakSummary {
    pub leak_ec: u64,
    pub blocks: usize,
    pub failed: usize,
    pub fer: f64,
    pub raw_bits: u64,
    pub retained_bits: u64,
}

impl BlockLedger {
    pub fn new(l_in: usize, l_syn: usize) -> Self {
        Self { l_in, l_syn, confirm_bits: CONFIRM_BITS, blocks: Vec::new() }
    }

    pub fn push(&mut self, stream: StreamId, index: usize) -> usize {
        self.blocks.push(BlockEntry { stream, index, status: BlockStatus::Pending, iterations: 0 });
        self.blocks.len() - 1
    }

    /// Bits made public for a resolved block: syndrome and hash when
    /// confirmed, the whole block when disclosed.
    pub fn disclosed_bits(&self, status: BlockStatus) -> Option<u64> {
        match status {
            BlockStatus::Confirmed => Some((self.l_syn + self.confirm_bits) as u64),
            BlockStatus::Disclosed => Some(self.l_in as u64),
            _ => None,
        }
    }

    pub fn leak_accounting(&self) -> Result<LeakSummary> {
        let mut leak = 0u64;
        let mut failed = 0;
        for (k, b) in self.blocks.iter().enumerate() {
            leak += self.disclosed_bits(b.status).ok_or(Error::UnresolvedBlock(k))?;
            failed += usize::from(b.status == BlockStatus::Disclosed);
        }
        let raw = (self.blocks.len() * self.l_in) as u64;
        Ok(LeakSummary {
            leak_ec: leak,
            blocks: self.blocks.len(),
            failed,
            fer: if self.blocks.is_empty() { 0.0 } else { failed as f64 / self.blocks.len() as f64 },
            raw_bits: raw,
            retained_bits: raw.saturating_sub(leak),
        })
    }

    /// Leak increase when one confirmed block turns into a disclosed one.
    pub fn failure_penalty(&self) -> u64 {
        (self.l_in - self.l_syn - self.confirm_bits) as u64
    }
}

pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// `beta = r / (1 - h(BER))`.
pub fn efficiency(rate: f64, ber: f64) -> f64 {
    rate / (1.0 - binary_entropy(ber))
}

/// Reconciliation efficiency under the capacity definitions in use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub x_stream: f64,
    pub p_stream: f64,
    /// Capacity at the mean error rate of both streams.
    pub averaged: f64,
    /// Capacity of the stream with the lower error rate.
    pub best_stream: f64,
}

impl EfficiencyReport {
    pub fn new(rate: f64, ber_x: f64, ber_p: f64) -> Self {
        Self {
            x_stream: efficiency(rate, ber_x),
            p_stream: efficiency(rate, ber_p),
            averaged: efficiency(rate, 0.5 * (ber_x + ber_p)),
            best_stream: efficiency(rate, ber_x.min(ber_p)),
        }
    }
}
