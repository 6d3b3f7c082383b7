//! Two-peer session over a reliable ordered byte stream: key map, reverse
//! reconciliation, confirmation, disclosure of failed blocks, privacy
//! amplification and transcript authentication.
//!
//! Bob leads every exchange; Alice only writes after reading everything Bob
//! sent in the current phase, so bounded transports cannot deadlock.

use std::io::{Read, Write};

use cvqkd_core::Complex64;
use cvqkd_keyrate::finite::{delta_aep, key_length, Corrections, KeyLengthReport, RANK_RHO_X};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::auth::{AuthContext, SECRET_BYTES, TAG_BITS};
use crate::bits::PackedBits;
use crate::confirm::poly_hash128;
use crate::entropy::EntropySource;
use crate::epsilon::{epsilon_ledger, EpsilonInputs, EpsilonLedger};
use crate::error::{Error, Result};
use crate::keymap::{key_map, symbol_bits};
use crate::ldpc::{LdpcCode, MAX_ITER};
use crate::ledger::{BlockLedger, BlockStatus, EfficiencyReport, LeakSummary, StreamId, CONFIRM_BITS};
use crate::pa::{privacy_amplify, seed_len};
use crate::wire::{read_message, write_message, Fields, Message, MsgType};

const MAGIC: &[u8; 4] = b"CVQK";
const VERSION: u16 = 1;
/// Key bits kept back for the next session's authentication secret.
pub const AUTH_RESERVE_BITS: u64 = 8 * SECRET_BYTES as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Alice,
    Bob,
}

impl Role {
    fn code(self) -> u8 {
        match self {
            Self::Alice => 0,
            Self::Bob => 1,
        }
    }
}

/// How the final key length is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KeySizing {
    /// Security bound with the measured leak, re-evaluated for the rounds
    /// that fill complete blocks.
    Report { report: Box<KeyLengthReport> },
    /// Explicit length, for exercising the mechanics.
    Fixed { bits: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub session_id: u64,
    pub m_range: f64,
    pub delta_r: f64,
    /// Decoder crossover priors for the X and P streams.
    pub crossover: [f64; 2],
    pub max_iter: usize,
    pub sizing: KeySizing,
    pub reserve_auth: bool,
    pub epsilon: EpsilonInputs,
}

impl SessionConfig {
    pub fn new(sizing: KeySizing, crossover: [f64; 2]) -> Self {
        Self {
            session_id: 0,
            m_range: 5.0,
            delta_r: 0.0,
            crossover,
            max_iter: MAX_ITER,
            sizing,
            reserve_auth: true,
            epsilon: EpsilonInputs::default(),
        }
    }
}

/// Each peer's share of the raw data.
pub enum RoleData<'a> {
    Alice { states: [Complex64; 4], symbols: &'a [u8] },
    Bob { outcomes: &'a [Complex64] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub role: Role,
    pub code_id: u8,
    pub rounds: u64,
    pub kept_rounds: u64,
    pub used_rounds: u64,
    pub leftover_rounds: u64,
    pub blocks_per_stream: usize,
    pub leak: LeakSummary,
    pub failed_per_stream: [usize; 2],
    /// Bit error rates seen by Alice's corrections.
    pub observed_ber: Option<[f64; 2]>,
    pub efficiency: EfficiencyReport,
    pub bound_bits: Option<f64>,
    pub pa_output_bits: u64,
    pub key_bits: u64,
    pub auth_reserved_bits: u64,
    pub key_sha256: String,
    pub transcript_bytes: u64,
    pub epsilon: EpsilonLedger,
    pub abort: bool,
    pub ledger: BlockLedger,
}

pub struct SessionOutput {
    pub key: PackedBits,
    pub next_auth_secret: Option<Vec<u8>>,
    pub report: SessionReport,
}

struct Channel<'t, T> {
    io: &'t mut T,
    auth: AuthContext,
    bytes: u64,
}

impl<T: Read + Write> Channel<'_, T> {
    fn send(&mut self, kind: MsgType, payload: Vec<u8>) -> Result<()> {
        let m = Message::new(kind, payload);
        if !matches!(kind, MsgType::AuthTag | MsgType::Abort) {
            self.auth.absorb(kind as u8, &m.payload);
        }
        self.bytes += m.encoded_len() as u64;
        write_message(self.io, &m)
    }

    fn recv(&mut self, kind: MsgType) -> Result<Vec<u8>> {
        let m = read_message(self.io)?;
        self.bytes += m.encoded_len() as u64;
        if m.kind == MsgType::Abort {
            return Err(Error::PeerAbort(String::from_utf8_lossy(m.payload.get(1..).unwrap_or(&[])).into_owned()));
        }
        if m.kind != kind {
            return Err(Error::Protocol(format!("expected {kind:?}, got {:?}", m.kind)));
        }
        if kind != MsgType::AuthTag {
            self.auth.absorb(kind as u8, &m.payload);
        }
        Ok(m.payload)
    }

    /// Sends ABORT and returns the local error.
    fn abort(&mut self, reason: u8, e: Error) -> Error {
        let mut p = vec![reason];
        p.extend(e.to_string().as_bytes());
        let _ = self.send(MsgType::Abort, p);
        e
    }
}

struct Blocks {
    per_stream: usize,
    used: usize,
}

fn split(kept: usize, l_in: usize) -> Blocks {
    let per_stream = kept / l_in;
    Blocks { per_stream, used: per_stream * l_in }
}

fn block_index(b: usize, per_stream: usize) -> (StreamId, usize) {
    if b < per_stream {
        (StreamId::X, b)
    } else {
        (StreamId::P, b - per_stream)
    }
}

fn stream_code(s: StreamId) -> u8 {
    match s {
        StreamId::X => 0,
        StreamId::P => 1,
    }
}

fn hello(role: Role, session: u64) -> Vec<u8> {
    let mut p = MAGIC.to_vec();
    p.extend(VERSION.to_be_bytes());
    p.push(role.code());
    p.extend(session.to_be_bytes());
    p
}

fn check_hello(p: &[u8], expect_role: Role, session: u64) -> Result<()> {
    let mut f = Fields::new(p);
    if f.take(4)? != MAGIC || f.u16()? != VERSION {
        return Err(Error::Protocol("peer speaks another protocol version".into()));
    }
    if f.u8()? != expect_role.code() {
        return Err(Error::Protocol("both peers claim the same role".into()));
    }
    if f.u64()? != session {
        return Err(Error::Protocol("session identifiers differ".into()));
    }
    f.finish()
}

fn block_header(b: usize, per_stream: usize) -> Vec<u8> {
    let (s, i) = block_index(b, per_stream);
    let mut p = vec![stream_code(s)];
    p.extend((i as u32).to_be_bytes());
    p
}

fn check_block_header(f: &mut Fields<'_>, b: usize, per_stream: usize) -> Result<()> {
    let (s, i) = block_index(b, per_stream);
    if f.u8()? != stream_code(s) || f.u32()? as usize != i {
        return Err(Error::Protocol(format!("block {b} arrived out of order")));
    }
    Ok(())
}

fn rounds_key_bits(x: &[u8], p: &[u8], used: usize, l_in: usize) -> Vec<PackedBits> {
    x[..used].chunks(l_in).chain(p[..used].chunks(l_in)).map(PackedBits::from_bits).collect()
}

/// Final length before the authentication reserve, and the bound it came from.
fn size_key(sizing: &KeySizing, used_rounds: usize, leak: u64, m: u64) -> Result<(u64, Option<f64>)> {
    match sizing {
        KeySizing::Fixed { bits } => {
            if *bits > m {
                return Err(Error::InvalidArgument(format!("fixed key length {bits} exceeds {m} reconciled bits")));
            }
            Ok((*bits, None))
        }
        KeySizing::Report { report } => {
            if used_rounds == 0 {
                return Ok((0, None));
            }
            let n = used_rounds as f64;
            let corrections =
                Corrections { delta_aep: delta_aep(report.epsilon.bar, RANK_RHO_X, n)?, delta_w: report.delta_w };
            let r = key_length(
                report.entropy_lb,
                corrections,
                leak as f64,
                report.epsilon,
                report.epsilon_pa_imp,
                n,
                report.n_total,
            )?;
            Ok((r.l.min(m), Some(r.bound_bits)))
        }
    }
}

fn sha256_hex(key: &PackedBits) -> String {
    hex::encode(Sha256::digest(key.to_bytes()))
}

fn clamp_prior(p: f64) -> f64 {
    p.clamp(1e-6, 0.4999)
}

struct Finish {
    key: PackedBits,
    next_auth_secret: Option<Vec<u8>>,
    pa_output_bits: u64,
    reserved: u64,
}

/// Splits the amplified key into the session key and the next secret.
fn finish_key(amplified: PackedBits, reserve: bool) -> Finish {
    let l = amplified.len() as u64;
    if reserve && l > AUTH_RESERVE_BITS {
        let keep = (l - AUTH_RESERVE_BITS) as usize;
        let secret = amplified.slice(keep, AUTH_RESERVE_BITS as usize).to_bytes();
        Finish { key: amplified.slice(0, keep), next_auth_secret: Some(secret), pa_output_bits: l, reserved: AUTH_RESERVE_BITS }
    } else {
        Finish { key: amplified, next_auth_secret: None, pa_output_bits: l, reserved: 0 }
    }
}

/// Runs one peer of a session on `endpoint`. Bob draws hash keys and the
/// privacy-amplification seed from `entropy`; Alice never reads it.
pub fn run_session<T: Read + Write>(
    data: RoleData<'_>,
    code: &LdpcCode,
    cfg: &SessionConfig,
    auth_secret: &[u8],
    entropy: &mut EntropySource,
    endpoint: &mut T,
) -> Result<SessionOutput> {
    let mut ch = Channel { io: endpoint, auth: AuthContext::new(auth_secret)?, bytes: 0 };
    match data {
        RoleData::Bob { outcomes } => bob(outcomes, code, cfg, entropy, &mut ch),
        RoleData::Alice { states, symbols } => alice(&states, symbols, code, cfg, &mut ch),
    }
}

fn bob<T: Read + Write>(
    outcomes: &[Complex64],
    code: &LdpcCode,
    cfg: &SessionConfig,
    entropy: &mut EntropySource,
    ch: &mut Channel<'_, T>,
) -> Result<SessionOutput> {
    let l_in = code.l_in();
    let keys: Vec<_> = outcomes.iter().map(|&z| key_map(z, cfg.m_range, cfg.delta_r)).collect();
    let kept_mask = PackedBits::from_bits(&keys.iter().map(|k| u8::from(k.is_some())).collect::<Vec<_>>());
    let (x, p): (Vec<u8>, Vec<u8>) = keys.iter().flatten().map(|k| (k.x, k.p)).unzip();

    ch.send(MsgType::Hello, hello(Role::Bob, cfg.session_id))?;
    check_hello(&ch.recv(MsgType::Hello)?, Role::Alice, cfg.session_id)?;

    let mut params = vec![code.spec.id];
    params.extend((l_in as u32).to_be_bytes());
    params.extend((outcomes.len() as u64).to_be_bytes());
    params.extend(kept_mask.to_bytes());
    ch.send(MsgType::Params, params)?;
    let reply = ch.recv(MsgType::Params)?;
    let mut f = Fields::new(&reply);
    if f.u8()? != code.spec.id || f.u32()? as usize != l_in || f.u64()? != outcomes.len() as u64 {
        return Err(ch.abort(1, Error::Protocol("peers disagree on code or round count".into())));
    }
    f.finish()?;

    let split = split(x.len(), l_in);
    let blocks = rounds_key_bits(&x, &p, split.used, l_in);
    let syndromes: Vec<Vec<u8>> =
        blocks.par_iter().map(|b| code.syndrome(&b.to_bits())).collect::<Result<_>>()?;
    for (b, s) in syndromes.iter().enumerate() {
        let mut m = block_header(b, split.per_stream);
        m.extend(PackedBits::from_bits(s).to_bytes());
        ch.send(MsgType::Syndrome, m)?;
    }
    for (b, block) in blocks.iter().enumerate() {
        let key = entropy.u128()?;
        let mut m = block_header(b, split.per_stream);
        m.extend(key.to_be_bytes());
        m.extend(poly_hash128(block, key).to_be_bytes());
        ch.send(MsgType::ConfirmHash, m)?;
    }

    let result = ch.recv(MsgType::ConfirmResult)?;
    let mut f = Fields::new(&result);
    if f.u32()? as usize != blocks.len() {
        return Err(ch.abort(1, Error::Protocol("confirmation covers the wrong number of blocks".into())));
    }
    let ok = PackedBits::from_bytes(f.rest(), blocks.len());

    let mut ledger = BlockLedger::new(l_in, code.l_syn());
    for (b, block) in blocks.iter().enumerate() {
        let (s, i) = block_index(b, split.per_stream);
        let k = ledger.push(s, i);
        if ok.get(b) == 1 {
            ledger.blocks[k].status = BlockStatus::Confirmed;
        } else {
            let mut m = block_header(b, split.per_stream);
            m.extend(block.to_bytes());
            ch.send(MsgType::BlockDisclose, m)?;
            ledger.blocks[k].status = BlockStatus::Disclosed;
        }
    }
    let leak = ledger.leak_accounting()?;
    let m_bits = leak.raw_bits;
    let (l, bound) = match size_key(&cfg.sizing, split.used, leak.leak_ec, m_bits) {
        Ok(v) => v,
        Err(e) => return Err(ch.abort(2, e)),
    };
    let seed = if l > 0 { entropy.bits(seed_len(m_bits as usize, l as usize))? } else { PackedBits::zeros(0) };
    let mut pa = m_bits.to_be_bytes().to_vec();
    pa.extend(l.to_be_bytes());
    pa.extend(seed.to_bytes());
    ch.send(MsgType::PaParams, pa)?;

    let amplified = if l > 0 { privacy_amplify(&PackedBits::concat(&blocks), l as usize, &seed)? } else { PackedBits::zeros(0) };
    let tag = ch.auth.tag();
    ch.send(MsgType::AuthTag, tag.to_vec())?;
    let peer_tag = ch.recv(MsgType::AuthTag)?;
    if peer_tag != tag {
        return Err(Error::AuthenticationFailed);
    }
    let fin = finish_key(amplified, cfg.reserve_auth);
    let report = report(Role::Bob, code, cfg, outcomes.len(), x.len(), &split, ledger, leak, None, bound, &fin, ch);
    Ok(SessionOutput { key: fin.key, next_auth_secret: fin.next_auth_secret, report })
}

fn alice<T: Read + Write>(
    states: &[Complex64; 4],
    symbols: &[u8],
    code: &LdpcCode,
    cfg: &SessionConfig,
    ch: &mut Channel<'_, T>,
) -> Result<SessionOutput> {
    let l_in = code.l_in();
    check_hello(&ch.recv(MsgType::Hello)?, Role::Bob, cfg.session_id)?;
    ch.send(MsgType::Hello, hello(Role::Alice, cfg.session_id))?;

    let params = ch.recv(MsgType::Params)?;
    let mut f = Fields::new(&params);
    let (id, len, rounds) = (f.u8()?, f.u32()? as usize, f.u64()?);
    if id != code.spec.id || len != l_in || rounds != symbols.len() as u64 {
        return Err(ch.abort(1, Error::Protocol("peers disagree on code or round count".into())));
    }
    let kept_mask = PackedBits::from_bytes(f.rest(), symbols.len());
    let mut reply = vec![code.spec.id];
    reply.extend((l_in as u32).to_be_bytes());
    reply.extend((symbols.len() as u64).to_be_bytes());
    ch.send(MsgType::Params, reply)?;

    let kept: Vec<u8> = symbols.iter().enumerate().filter(|&(i, _)| kept_mask.get(i) == 1).map(|(_, &s)| s).collect();
    let (x, p) = symbol_bits(states, &kept);
    let split = split(kept.len(), l_in);
    let raw = rounds_key_bits(&x, &p, split.used, l_in);
    let n_blocks = raw.len();

    let syn_bytes = code.l_syn().div_ceil(8);
    let mut syndromes = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let m = ch.recv(MsgType::Syndrome)?;
        let mut f = Fields::new(&m);
        check_block_header(&mut f, b, split.per_stream)?;
        syndromes.push(PackedBits::from_bytes(f.take(syn_bytes)?, code.l_syn()).to_bits());
        f.finish()?;
    }
    let mut hashes = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let m = ch.recv(MsgType::ConfirmHash)?;
        let mut f = Fields::new(&m);
        check_block_header(&mut f, b, split.per_stream)?;
        hashes.push((f.u128()?, f.u128()?));
        f.finish()?;
    }

    let outcomes: Vec<(PackedBits, bool, usize)> = raw
        .par_iter()
        .zip(&syndromes)
        .enumerate()
        .map(|(b, (block, syn))| {
            let (s, _) = block_index(b, split.per_stream);
            let prior = clamp_prior(cfg.crossover[stream_code(s) as usize]);
            let out = code.decode(&block.to_bits(), syn, prior, cfg.max_iter)?;
            let bits = PackedBits::from_bits(&out.bits);
            let (key, hash) = hashes[b];
            let ok = out.success && poly_hash128(&bits, key) == hash;
            Ok((bits, ok, out.iterations))
        })
        .collect::<Result<_>>()?;

    let mut ledger = BlockLedger::new(l_in, code.l_syn());
    let mut result = (n_blocks as u32).to_be_bytes().to_vec();
    let verdicts = PackedBits::from_bits(&outcomes.iter().map(|o| u8::from(o.1)).collect::<Vec<_>>());
    result.extend(verdicts.to_bytes());
    ch.send(MsgType::ConfirmResult, result)?;

    let mut corrected = Vec::with_capacity(n_blocks);
    for (b, (bits, ok, iterations)) in outcomes.into_iter().enumerate() {
        let (s, i) = block_index(b, split.per_stream);
        let k = ledger.push(s, i);
        ledger.blocks[k].iterations = iterations;
        if ok {
            ledger.blocks[k].status = BlockStatus::Confirmed;
            corrected.push(bits);
        } else {
            ledger.blocks[k].status = BlockStatus::Failed;
            let m = ch.recv(MsgType::BlockDisclose)?;
            let mut f = Fields::new(&m);
            check_block_header(&mut f, b, split.per_stream)?;
            corrected.push(PackedBits::from_bytes(f.take(l_in.div_ceil(8))?, l_in));
            f.finish()?;
            ledger.blocks[k].status = BlockStatus::Disclosed;
        }
    }
    let leak = ledger.leak_accounting()?;
    let m_bits = leak.raw_bits;
    let (l, bound) = match size_key(&cfg.sizing, split.used, leak.leak_ec, m_bits) {
        Ok(v) => v,
        Err(e) => return Err(ch.abort(2, e)),
    };
    let pa = ch.recv(MsgType::PaParams)?;
    let mut f = Fields::new(&pa);
    if f.u64()? != m_bits || f.u64()? != l {
        return Err(ch.abort(2, Error::Protocol("peers disagree on the final key length".into())));
    }
    let seed = PackedBits::from_bytes(f.rest(), if l > 0 { seed_len(m_bits as usize, l as usize) } else { 0 });

    let mut errors = [0usize; 2];
    for (b, (r, c)) in raw.iter().zip(&corrected).enumerate() {
        errors[b / split.per_stream.max(1)] += r.xor(c).count_ones();
    }
    let observed = (split.used > 0).then(|| errors.map(|e| e as f64 / split.used as f64));

    let amplified = if l > 0 { privacy_amplify(&PackedBits::concat(&corrected), l as usize, &seed)? } else { PackedBits::zeros(0) };
    let tag = ch.auth.tag();
    let peer_tag = ch.recv(MsgType::AuthTag)?;
    if peer_tag != tag {
        return Err(ch.abort(3, Error::AuthenticationFailed));
    }
    ch.send(MsgType::AuthTag, tag.to_vec())?;
    let fin = finish_key(amplified, cfg.reserve_auth);
    let report = report(Role::Alice, code, cfg, symbols.len(), kept.len(), &split, ledger, leak, observed, bound, &fin, ch);
    Ok(SessionOutput { key: fin.key, next_auth_secret: fin.next_auth_secret, report })
}

#[allow(clippy::too_many_arguments)]
fn report<T>(
    role: Role,
    code: &LdpcCode,
    cfg: &SessionConfig,
    rounds: usize,
    kept: usize,
    split: &Blocks,
    ledger: BlockLedger,
    leak: LeakSummary,
    observed_ber: Option<[f64; 2]>,
    bound_bits: Option<f64>,
    fin: &Finish,
    ch: &Channel<'_, T>,
) -> SessionReport {
    let mut failed = [0usize; 2];
    for b in &ledger.blocks {
        if b.status == BlockStatus::Disclosed {
            failed[stream_code(b.stream) as usize] += 1;
        }
    }
    let epsilon = epsilon_ledger(
        &cfg.epsilon,
        leak.retained_bits as f64,
        CONFIRM_BITS as u32,
        ch.auth.transcript_bits() as f64,
        TAG_BITS,
    );
    let key_bits = fin.key.len() as u64;
    SessionReport {
        role,
        code_id: code.spec.id,
        rounds: rounds as u64,
        kept_rounds: kept as u64,
        used_rounds: split.used as u64,
        leftover_rounds: (kept - split.used) as u64,
        blocks_per_stream: split.per_stream,
        leak,
        failed_per_stream: failed,
        observed_ber,
        efficiency: EfficiencyReport::new(code.rate(), cfg.crossover[0], cfg.crossover[1]),
        bound_bits,
        pa_output_bits: fin.pa_output_bits,
        key_bits,
        auth_reserved_bits: fin.reserved,
        key_sha256: sha256_hex(&fin.key),
        transcript_bytes: ch.bytes,
        epsilon,
        abort: key_bits == 0,
        ledger,
    }
}
