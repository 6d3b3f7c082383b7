//! Multi-edge-type LDPC codes for reverse reconciliation over the BSC and a
//! syndrome-based sum-product decoder.
//!
//! Ensemble: a fraction `c` of the bits are core bits; each of the remaining
//! bits has degree one and joins one type-B check, which also holds `k2`
//! core bits. Type-A checks hold only core bits and make up the rest of the
//! syndrome. Type-B checks turn the degree-one bits into a low-rate
//! repetition-like layer; type-A checks carry the remaining redundancy.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{expect_len, invalid, Result};

/// Input block length of every code.
pub const BLOCK_LEN: usize = 102_400;

/// Decoder iteration cap.
pub const MAX_ITER: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    /// Fraction of core bits.
    pub core_fraction: f64,
    /// Core bits per type-B check.
    pub k2: usize,
    /// `(fraction of core bits, type-A degree)`.
    pub d1_mix: Vec<(f64, usize)>,
    /// Cycles of degree-two core bits up to this length are removed.
    pub girth_two: usize,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self { core_fraction: 0.12, k2: 2, d1_mix: vec![(0.5, 2), (0.5, 3)], girth_two: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub id: u8,
    pub rate: f64,
    /// Crossover probability up to which at least half the blocks decode.
    pub threshold: f64,
    pub l_in: usize,
    pub seed: u64,
    pub ensemble: Ensemble,
}

impl CodeSpec {
    /// The three codes of the link, by index.
    pub fn standard(id: u8) -> Result<Self> {
        let (rate, threshold) = match id {
            0 => (0.06125, 0.3492),
            1 => (0.07, 0.3382),
            2 => (0.08, 0.3267),
            _ => return Err(invalid(format!("unknown code id {id}"))),
        };
        // the highest-rate code needs a larger core to keep its waterfall
        let core_fraction = if id == 2 { 0.14 } else { 0.12 };
        Ok(Self {
            id,
            rate,
            threshold,
            l_in: BLOCK_LEN,
            seed: 0xEC0 + u64::from(id),
            ensemble: Ensemble { core_fraction, ..Ensemble::default() },
        })
    }

    pub fn l_syn(&self) -> usize {
        (self.l_in as f64 * (1.0 - self.rate)).round() as usize
    }
}

/// Parity-check matrix in compressed form, edges numbered check by check.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    pub spec: CodeSpec,
    check_ptr: Vec<u32>,
    edge_var: Vec<u32>,
    var_degree: Vec<u32>,
}

/// Spreads `total` sockets over `n` nodes as evenly as possible.
fn even_degrees(total: usize, n: usize) -> Vec<usize> {
    let base = total / n;
    let extra = total % n;
    (0..n).map(|i| base + usize::from(i < extra)).collect()
}

/// Pairs variable sockets with check sockets at random, then repairs
/// repeated variables within a check by random swaps.
fn match_sockets(var_deg: &[(u32, usize)], check_deg: &[usize], rng: &mut ChaCha20Rng) -> Vec<Vec<u32>> {
    let mut sockets: Vec<u32> = var_deg.iter().flat_map(|&(v, d)| std::iter::repeat_n(v, d)).collect();
    assert_eq!(sockets.len(), check_deg.iter().sum::<usize>(), "socket counts differ");
    sockets.shuffle(rng);
    let mut starts = Vec::with_capacity(check_deg.len() + 1);
    starts.push(0);
    for d in check_deg {
        starts.push(starts.last().unwrap() + d);
    }
    let owner = |s: usize, starts: &[usize]| starts.partition_point(|&x| x <= s) - 1;
    for _round in 0..100 {
        let mut clean = true;
        for c in 0..check_deg.len() {
            for a in starts[c]..starts[c + 1] {
                let dup = (starts[c]..a).any(|b| sockets[b] == sockets[a]);
                if dup {
                    clean = false;
                    let other = rng.random_range(0..sockets.len());
                    let oc = owner(other, &starts);
                    let v = sockets[a];
                    let w = sockets[other];
                    let fits_here = !(starts[c]..starts[c + 1]).any(|i| sockets[i] == w);
                    let fits_there = !(starts[oc]..starts[oc + 1]).any(|i| sockets[i] == v);
                    if oc != c && fits_here && fits_there {
                        sockets.swap(a, other);
                    }
                }
            }
        }
        if clean {
            break;
        }
    }
    (0..check_deg.len()).map(|c| sockets[starts[c]..starts[c + 1]].to_vec()).collect()
}

/// Removes length-4 cycles (two checks sharing a pair of variables) by
/// swapping sockets between checks of the same group. Returns the number
/// found on entry.
fn break_repeated_pairs(checks: &mut [Vec<u32>], groups: &[std::ops::Range<usize>], rng: &mut ChaCha20Rng) -> usize {
    let mut found = None;
    for _round in 0..200 {
        let mut seen = HashSet::with_capacity(4 * checks.len());
        let mut bad = Vec::new();
        for (c, vs) in checks.iter().enumerate() {
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    if !seen.insert((vs[i].min(vs[j]), vs[i].max(vs[j]))) {
                        bad.push(c);
                    }
                }
            }
        }
        found.get_or_insert(bad.len());
        if bad.is_empty() {
            break;
        }
        for c in bad {
            let g = groups.iter().find(|g| g.contains(&c)).expect("check outside every group").clone();
            let o = rng.random_range(g);
            if o == c {
                continue;
            }
            let i = rng.random_range(0..checks[c].len());
            let j = rng.random_range(0..checks[o].len());
            let (v, w) = (checks[c][i], checks[o][j]);
            if !checks[c].contains(&w) && !checks[o].contains(&v) {
                checks[c][i] = w;
                checks[o][j] = v;
            }
        }
    }
    found.unwrap_or(0)
}

/// Whether `to` is reachable from `from` within `depth` edges of the graph
/// whose nodes are checks and whose edges are the degree-two variables,
/// skipping variable `skip`. `stamp` is scratch space of one entry per check.
fn within(adj: &[Vec<(u32, usize)>], from: usize, to: usize, skip: u32, depth: usize, stamp: &mut [u32], mark: u32) -> bool {
    let mut frontier = vec![from];
    stamp[from] = mark;
    for _ in 0..depth {
        let mut next = Vec::new();
        for &c in &frontier {
            for &(v, o) in &adj[c] {
                if v == skip || stamp[o] == mark {
                    continue;
                }
                if o == to {
                    return true;
                }
                stamp[o] = mark;
                next.push(o);
            }
        }
        frontier = next;
    }
    false
}

/// Breaks cycles of length up to `max_len` formed by variables that have
/// exactly two edges into `checks`. Such cycles carry low-weight codewords.
/// Returns the number found on entry.
fn break_short_cycles(checks: &mut [Vec<u32>], two: &HashSet<u32>, max_len: usize, rng: &mut ChaCha20Rng) -> usize {
    let mut found = None;
    for _round in 0..50 {
        let mut ends: std::collections::HashMap<u32, Vec<usize>> = std::collections::HashMap::new();
        for (c, vs) in checks.iter().enumerate() {
            for v in vs {
                if two.contains(v) {
                    ends.entry(*v).or_default().push(c);
                }
            }
        }
        let mut adj = vec![Vec::new(); checks.len()];
        let mut vars: Vec<(u32, usize, usize)> = ends.iter().map(|(&v, e)| (v, e[0], e[1])).collect();
        vars.sort_unstable();
        for &(v, a, b) in &vars {
            adj[a].push((v, b));
            adj[b].push((v, a));
        }
        let mut stamp = vec![0u32; checks.len()];
        let bad: Vec<(u32, usize)> = vars
            .iter()
            .enumerate()
            .filter(|&(k, &(v, a, b))| within(&adj, a, b, v, max_len - 1, &mut stamp, k as u32 + 1))
            .map(|(_, &(v, _, b))| (v, b))
            .collect();
        found.get_or_insert(bad.len());
        if bad.is_empty() {
            break;
        }
        for (v, b) in bad {
            let o = rng.random_range(0..checks.len());
            let j = rng.random_range(0..checks[o].len());
            let w = checks[o][j];
            if o == b || two.contains(&w) || checks[b].contains(&w) || checks[o].contains(&v) {
                continue;
            }
            let i = checks[b].iter().position(|&x| x == v).expect("variable listed in its check");
            checks[b][i] = w;
            checks[o][j] = v;
        }
    }
    found.unwrap_or(0)
}

impl LdpcCode {
    /// Deterministic seeded construction.
    pub fn build(spec: CodeSpec) -> Result<Self> {
        let e = &spec.ensemble;
        let l = spec.l_in;
        let l_syn = spec.l_syn();
        if !(spec.rate > 0.0 && spec.rate < 1.0) || (l as f64 * (1.0 - spec.rate) - l_syn as f64).abs() > 1e-6 {
            return Err(invalid(format!("rate {} does not give an integral syndrome length for {l}", spec.rate)));
        }
        let n_core = (e.core_fraction * l as f64).round() as usize;
        let n_one = l - n_core;
        if n_one >= l_syn || e.k2 == 0 || e.d1_mix.is_empty() {
            return Err(invalid("ensemble leaves no type-A checks"));
        }
        let n_a = l_syn - n_one;
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

        // variable labels: a seeded permutation spreads the core bits
        let mut labels: Vec<u32> = (0..l as u32).collect();
        labels.shuffle(&mut rng);
        let (core, ones) = labels.split_at(n_core);

        // type-B checks: k2 core sockets each, core type-2 degrees as even as possible
        let d2 = even_degrees(e.k2 * n_one, n_core);
        let core_d2: Vec<(u32, usize)> = core.iter().copied().zip(d2).collect();
        let b_checks = match_sockets(&core_d2, &vec![e.k2; n_one], &mut rng);

        // type-A checks: core type-1 degrees from the mix, check degrees even
        let mut d1 = Vec::with_capacity(n_core);
        let mut assigned = 0;
        for (k, &(frac, deg)) in e.d1_mix.iter().enumerate() {
            let count = if k + 1 == e.d1_mix.len() { n_core - assigned } else { (frac * n_core as f64).round() as usize };
            d1.extend(std::iter::repeat_n(deg, count));
            assigned += count;
        }
        let total_a: usize = d1.iter().sum();
        let core_d1: Vec<(u32, usize)> = core.iter().copied().zip(d1).collect();
        let a_checks = match_sockets(&core_d1, &even_degrees(total_a, n_a), &mut rng);
        let two: HashSet<u32> = core_d1.iter().filter(|(_, d)| *d == 2).map(|(v, _)| *v).collect();
        let mut checks = b_checks;
        checks.extend(a_checks);
        for _ in 0..20 {
            let pairs = break_repeated_pairs(&mut checks, &[0..n_one, n_one..l_syn], &mut rng);
            let cycles =
                if e.girth_two > 0 { break_short_cycles(&mut checks[n_one..], &two, e.girth_two, &mut rng) } else { 0 };
            log::debug!("code {}: {pairs} repeated pairs, {cycles} short degree-two cycles", spec.id);
            if pairs == 0 && cycles == 0 {
                break;
            }
        }
        let (b_checks, a_checks) = checks.split_at(n_one);

        let mut check_ptr = Vec::with_capacity(l_syn + 1);
        let mut edge_var = Vec::new();
        check_ptr.push(0u32);
        for (c, vs) in b_checks.iter().enumerate() {
            edge_var.push(ones[c]);
            edge_var.extend(vs);
            check_ptr.push(edge_var.len() as u32);
        }
        for vs in a_checks {
            edge_var.extend(vs);
            check_ptr.push(edge_var.len() as u32);
        }
        let mut var_degree = vec![0u32; l];
        for &v in &edge_var {
            var_degree[v as usize] += 1;
        }
        Ok(Self { spec, check_ptr, edge_var, var_degree })
    }

    pub fn standard(id: u8) -> Result<Self> {
        Self::build(CodeSpec::standard(id)?)
    }

    pub fn l_in(&self) -> usize {
        self.spec.l_in
    }

    pub fn l_syn(&self) -> usize {
        self.check_ptr.len() - 1
    }

    pub fn rate(&self) -> f64 {
        (self.l_in() - self.l_syn()) as f64 / self.l_in() as f64
    }

    pub fn edges(&self) -> usize {
        self.edge_var.len()
    }

    pub fn check_vars(&self, c: usize) -> &[u32] {
        &self.edge_var[self.check_ptr[c] as usize..self.check_ptr[c + 1] as usize]
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_degree[v] as usize
    }

    /// Counts pairs of checks sharing at least two variables.
    pub fn four_cycles(&self) -> usize {
        let mut seen = HashSet::new();
        let mut count = 0;
        for c in 0..self.l_syn() {
            let vs = self.check_vars(c);
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    if !seen.insert((vs[i].min(vs[j]), vs[i].max(vs[j]))) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    /// `H x` over GF(2), one bit per byte.
    pub fn syndrome(&self, bits: &[u8]) -> Result<Vec<u8>> {
        expect_len(self.l_in(), bits.len())?;
        Ok((0..self.l_syn()).map(|c| self.check_vars(c).iter().fold(0u8, |a, &v| a ^ (bits[v as usize] & 1))).collect())
    }

    fn satisfies(&self, bits: &[u8], syndrome: &[u8]) -> bool {
        (0..self.l_syn())
            .all(|c| self.check_vars(c).iter().fold(0u8, |a, &v| a ^ bits[v as usize]) == syndrome[c])
    }

    /// Sum-product decoding of Alice's bits against Bob's syndrome, with a
    /// layered (check-serial) schedule.
    pub fn decode(&self, alice: &[u8], syndrome: &[u8], crossover: f64, max_iter: usize) -> Result<DecodeOutcome> {
        expect_len(self.l_in(), alice.len())?;
        expect_len(self.l_syn(), syndrome.len())?;
        if !(crossover > 0.0 && crossover < 0.5) {
            return Err(invalid(format!("crossover probability {crossover} outside (0, 0.5)")));
        }
        let l0 = ((1.0 - crossover) / crossover).ln();
        let mut post: Vec<f64> = alice.iter().map(|&b| if b & 1 == 0 { l0 } else { -l0 }).collect();
        let mut hard: Vec<u8> = alice.iter().map(|b| b & 1).collect();
        if self.satisfies(&hard, syndrome) {
            return Ok(DecodeOutcome { bits: hard, success: true, iterations: 0 });
        }
        let mut c2v = vec![0.0f64; self.edges()];
        let mut q = Vec::with_capacity(16);
        let mut t = Vec::with_capacity(16);
        let max_deg = (0..self.l_syn()).map(|c| self.check_vars(c).len()).max().unwrap_or(0);
        let mut lead = vec![0.0f64; max_deg];
        let lim = 1.0 - 1e-15;
        for it in 1..=max_iter {
            for c in 0..self.l_syn() {
                let (s, e) = (self.check_ptr[c] as usize, self.check_ptr[c + 1] as usize);
                let sign = if syndrome[c] == 0 { 1.0 } else { -1.0 };
                q.clear();
                t.clear();
                for k in s..e {
                    let v = post[self.edge_var[k] as usize] - c2v[k];
                    q.push(v);
                    t.push((0.5 * v).tanh());
                }
                // leave-one-out products from both ends
                let n = e - s;
                let mut fwd = 1.0;
                let out = &mut lead[..n];
                for k in 0..n {
                    out[k] = fwd;
                    fwd *= t[k];
                }
                let mut back = 1.0;
                for k in (0..n).rev() {
                    let m = sign * 2.0 * (out[k] * back).clamp(-lim, lim).atanh();
                    back *= t[k];
                    c2v[s + k] = m;
                    post[self.edge_var[s + k] as usize] = q[k] + m;
                }
            }
            for (h, p) in hard.iter_mut().zip(&post) {
                *h = u8::from(*p < 0.0);
            }
            if self.satisfies(&hard, syndrome) {
                return Ok(DecodeOutcome { bits: hard, success: true, iterations: it });
            }
        }
        Ok(DecodeOutcome { bits: hard, success: false, iterations: max_iter })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    /// The output satisfies the syndrome exactly.
    pub success: bool,
    pub iterations: usize,
}
