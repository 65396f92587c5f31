//! Polar source coding with seed-padded unpolarized bits.
//!
//! A block `v` of n = 2^m source bits is transformed to `A = v·G_n` with
//! `G_n = P_n·F^{⊗m}`, `F = [1 0; 1 1]` and `P_n` the bit-reversal
//! permutation. Indices are partitioned by their conditional entropy
//! `H(A_j | A^{j-1})` against `δ_n = 2^{-n^β}` into high-entropy `H_V`,
//! low-entropy `U_V` and the unpolarized remainder `J_V`. The encoder keeps
//! `A[H_V]` and `A[J_V]` one-time padded with a uniform seed; the decoder
//! restores `A[U_V]` by successive cancellation.
//!
//! Indices are 0-based throughout.

use crate::error::{Error, Result};
use crate::io::{Reader, Writer};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

/// Default polarization exponent.
pub const DEFAULT_BETA: f64 = 0.3;

/// LLR saturation magnitude used by the decoder.
pub const LLR_CLAMP: f64 = 40.0;

/// Minimum Monte-Carlo sample count accepted by [`construct_profile`].
pub const MIN_SAMPLES: u64 = 1000;

const PROFILE_MAGIC: &[u8; 8] = b"NUHPOLR1";

/// Binary entropy in bits with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Bernoulli source `P(V = 1) = p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceModel {
    p: f64,
}

impl SourceModel {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::usage(format!("Bernoulli parameter {p} outside [0,1]")));
        }
        Ok(Self { p })
    }

    /// The source with `p ≤ 1/2` whose entropy is `h` bits, by bisection.
    pub fn from_entropy(h: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&h) {
            return Err(Error::usage(format!("entropy {h} outside [0,1]")));
        }
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if binary_entropy(mid) < h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::new(0.5 * (lo + hi))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn entropy(&self) -> f64 {
        binary_entropy(self.p)
    }

    /// Draw `n` i.i.d. bits.
    pub fn sample<R: RngCore>(&self, n: usize, rng: &mut R) -> Vec<u8> {
        let thr = bernoulli_threshold(self.p);
        (0..n).map(|_| bernoulli_bit(thr, rng)).collect()
    }
}

// P(bit = 1) = thr / 2^64, with p = 1 mapped to "always one".
fn bernoulli_threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 18446744073709551616.0) as u64)
    }
}

#[inline]
fn bernoulli_bit<R: RngCore>(thr: Option<u64>, rng: &mut R) -> u8 {
    match thr {
        None => 1,
        Some(t) => (rng.next_u64() < t) as u8,
    }
}

/// `δ_n = 2^{-n^β}`.
pub fn delta_n(n: usize, beta: f64) -> f64 {
    (-(n as f64).powf(beta)).exp2()
}

fn log2_exact(n: usize) -> Result<u32> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::usage(format!("block length {n} is not a power of two")));
    }
    Ok(n.trailing_zeros())
}

/// Bit-reversal of the low `m` bits of `i`.
pub fn bit_reverse(i: usize, m: u32) -> usize {
    if m == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - m)
    }
}

/// Binary-operation tally for the polar encoder under the convention of one
/// XOR and two output writes per butterfly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PolarOps {
    pub xors: u64,
    pub writes: u64,
}

impl PolarOps {
    pub fn total(&self) -> u64 {
        self.xors + self.writes
    }
}

/// `A = v·G_n` in O(n log n).
pub fn polar_transform(v: &[u8]) -> Result<Vec<u8>> {
    let mut ops = PolarOps::default();
    polar_transform_counted(v, &mut ops)
}

/// [`polar_transform`] with an instrumented operation counter.
pub fn polar_transform_counted(v: &[u8], ops: &mut PolarOps) -> Result<Vec<u8>> {
    let m = log2_exact(v.len())?;
    let n = v.len();
    let mut x: Vec<u8> = (0..n).map(|i| v[bit_reverse(i, m)] & 1).collect();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                x[i] ^= x[i + h];
            }
        }
        let butterflies = (n / 2) as u64;
        ops.xors += butterflies;
        ops.writes += 2 * butterflies;
        h *= 2;
    }
    Ok(x)
}

/// Per-index conditional entropies and the resulting index partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarProfile {
    n: usize,
    beta: f64,
    p: f64,
    samples: u64,
    rng_seed: u64,
    entropies: Vec<f64>,
    h_v: Vec<u32>,
    u_v: Vec<u32>,
    j_v: Vec<u32>,
}

impl PolarProfile {
    /// Partition indices by `δ_n`. `gaps[j]` must hold `1 − entropies[j]`
    /// computed without cancellation; it decides membership of `H_V`.
    pub fn from_estimates(
        src: SourceModel,
        n: usize,
        beta: f64,
        samples: u64,
        rng_seed: u64,
        entropies: Vec<f64>,
        gaps: &[f64],
    ) -> Result<Self> {
        log2_exact(n)?;
        check_beta(beta)?;
        if entropies.len() != n || gaps.len() != n {
            return Err(Error::usage("entropy vector length differs from n"));
        }
        let delta = delta_n(n, beta);
        let (mut h_v, mut u_v, mut j_v) = (Vec::new(), Vec::new(), Vec::new());
        for j in 0..n {
            if gaps[j] < delta {
                h_v.push(j as u32);
            } else if entropies[j] < delta {
                u_v.push(j as u32);
            } else {
                j_v.push(j as u32);
            }
        }
        Ok(Self { n, beta, p: src.p, samples, rng_seed, entropies, h_v, u_v, j_v })
    }

    /// Profile with a hand-chosen partition (toy instances and tests).
    pub fn from_partition(n: usize, beta: f64, p: f64, h_v: Vec<u32>, u_v: Vec<u32>, j_v: Vec<u32>) -> Result<Self> {
        log2_exact(n)?;
        check_beta(beta)?;
        let entropies = (0..n as u32)
            .map(|j| {
                if h_v.contains(&j) {
                    1.0
                } else if u_v.contains(&j) {
                    0.0
                } else {
                    0.5
                }
            })
            .collect();
        let prof = Self { n, beta, p, samples: 0, rng_seed: 0, entropies, h_v, u_v, j_v };
        prof.check_partition()?;
        Ok(prof)
    }

    fn check_partition(&self) -> Result<()> {
        let mut seen = vec![false; self.n];
        for list in [&self.h_v, &self.u_v, &self.j_v] {
            let mut prev: Option<u32> = None;
            for &j in list.iter() {
                let ju = j as usize;
                if ju >= self.n || seen[ju] {
                    return Err(Error::format(format!("index {j} repeated or out of range")));
                }
                if prev.is_some_and(|p| p >= j) {
                    return Err(Error::format("index list not ascending"));
                }
                prev = Some(j);
                seen[ju] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::format("index sets do not cover 0..n"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn source(&self) -> SourceModel {
        SourceModel { p: self.p }
    }
    pub fn samples(&self) -> u64 {
        self.samples
    }
    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
    pub fn delta(&self) -> f64 {
        delta_n(self.n, self.beta)
    }
    pub fn entropies(&self) -> &[f64] {
        &self.entropies
    }
    pub fn h_v(&self) -> &[u32] {
        &self.h_v
    }
    pub fn u_v(&self) -> &[u32] {
        &self.u_v
    }
    pub fn j_v(&self) -> &[u32] {
        &self.j_v
    }
    /// Seed length per message, `|J_V|`.
    pub fn d_j(&self) -> usize {
        self.j_v.len()
    }
    /// Compressed length `|H_V| + d_J`.
    pub fn n_tilde(&self) -> usize {
        self.h_v.len() + self.j_v.len()
    }
    /// `|H_V| / n`.
    pub fn hv_frac(&self) -> f64 {
        self.h_v.len() as f64 / self.n as f64
    }
    /// `d_J / n`.
    pub fn dj_frac(&self) -> f64 {
        self.j_v.len() as f64 / self.n as f64
    }

    /// Serialize to the `NUHPOLR1` format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(PROFILE_MAGIC);
        w.u32(self.n as u32);
        w.f64(self.beta);
        w.f64(self.p);
        w.u64(self.samples);
        w.u64(self.rng_seed);
        for &e in &self.entropies {
            w.f64(e);
        }
        for list in [&self.h_v, &self.u_v, &self.j_v] {
            w.u32(list.len() as u32);
            for &j in list.iter() {
                w.u32(j);
            }
        }
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(PROFILE_MAGIC)?;
        let n = r.u32()? as usize;
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::format(format!("profile block length {n} is not a power of two")));
        }
        let beta = r.f64()?;
        let p = r.f64()?;
        if !(0.0..0.5).contains(&beta) || !(0.0..=1.0).contains(&p) {
            return Err(Error::format("profile beta or p out of range"));
        }
        let samples = r.u64()?;
        let rng_seed = r.u64()?;
        let entropies = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let mut lists = Vec::new();
        for _ in 0..3 {
            let len = r.u32()? as usize;
            if len > n {
                return Err(Error::format("index list longer than n"));
            }
            lists.push((0..len).map(|_| r.u32()).collect::<Result<Vec<_>>>()?);
        }
        r.finish()?;
        let j_v = lists.pop().unwrap();
        let u_v = lists.pop().unwrap();
        let h_v = lists.pop().unwrap();
        let prof = Self { n, beta, p, samples, rng_seed, entropies, h_v, u_v, j_v };
        prof.check_partition()?;
        Ok(prof)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::usage(format!("beta={beta} outside [0, 0.5)")));
    }
    Ok(())
}

// Soft values are carried as t = tanh(L/2) in (-1, 1). Magnitudes are capped
// one ulp below 1 so the check-node denominator never vanishes; a capped value
// is read as a certain bit.
const T_MAX: f64 = 1.0 - f64::EPSILON;

// Returns (h, 1 - h) for the posterior P(0) = (1 + t)/2.
#[inline]
fn entropy_and_gap(t: f64) -> (f64, f64) {
    let a = t.abs();
    if a >= T_MAX {
        return (0.0, 1.0);
    }
    if a < 1e-2 {
        // 1 - h = (1/ln 2) Σ_k t^{2k} / (2k(2k-1))
        let t2 = t * t;
        let gap = t2 * (0.5 + t2 * (1.0 / 12.0 + t2 * (1.0 / 30.0 + t2 * (1.0 / 56.0)))) / std::f64::consts::LN_2;
        return (1.0 - gap, gap);
    }
    let p = 0.5 * (1.0 - a);
    let q = 1.0 - p;
    let h = -(p * p.log2() + q * (-p).ln_1p() / std::f64::consts::LN_2);
    (h, 1.0 - h)
}

// One genie-aided pass. The all-zero-codeword symmetry lets partial sums stay
// zero, so the right child is a plain variable-node combine.
fn genie_pass(inp: &[f64], scratch: &mut [f64], base: usize, ent: &mut [f64], gap: &mut [f64]) {
    let len = inp.len();
    if len == 1 {
        let (h, g) = entropy_and_gap(inp[0]);
        ent[base] += h;
        gap[base] += g;
        return;
    }
    if len == 2 {
        let (a, b) = (inp[0], inp[1]);
        let (h, g) = entropy_and_gap(a * b);
        ent[base] += h;
        gap[base] += g;
        let (h, g) = entropy_and_gap(((a + b) / (1.0 + a * b)).clamp(-T_MAX, T_MAX));
        ent[base + 1] += h;
        gap[base + 1] += g;
        return;
    }
    let half = len / 2;
    let (x, y) = inp.split_at(half);
    let (out, rest) = scratch.split_at_mut(half);
    for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
        *o = a * b;
    }
    genie_pass(out, rest, base, ent, gap);
    for ((o, &a), &b) in out.iter_mut().zip(x).zip(y) {
        *o = ((a + b) / (1.0 + a * b)).clamp(-T_MAX, T_MAX);
    }
    genie_pass(out, rest, base + half, ent, gap);
}

const SAMPLES_PER_CHUNK: u64 = 256;

/// Per-index sums of sample entropies and entropy gaps.
type ChunkSums = (Vec<f64>, Vec<f64>);

// Sum of per-sample entropies and gaps over one deterministic chunk.
fn profile_chunk(src: SourceModel, n: usize, seed: u64, chunk: u64, count: u64) -> ChunkSums {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let thr = bernoulli_threshold(src.p);
    let t0 = (1.0 - 2.0 * src.p).clamp(-T_MAX, T_MAX);
    let mut inp = vec![0.0f64; n];
    let mut scratch = vec![0.0f64; n];
    let mut ent = vec![0.0f64; n];
    let mut gap = vec![0.0f64; n];
    for _ in 0..count {
        for t in inp.iter_mut() {
            *t = if bernoulli_bit(thr, &mut rng) == 1 { -t0 } else { t0 };
        }
        genie_pass(&inp, &mut scratch, 0, &mut ent, &mut gap);
    }
    (ent, gap)
}

/// Estimate `H(A_j | A^{j-1})` for every index by Monte-Carlo genie-aided
/// successive cancellation, then partition by `δ_n`.
///
/// Each sample contributes the binary entropy of the exact posterior of `A_j`
/// given the sampled past, so the per-index average is an unbiased estimate
/// of the conditional entropy. Samples are processed in fixed chunks with
/// independent ChaCha streams, so the result does not depend on the number of
/// worker threads.
pub fn construct_profile(src: SourceModel, n: usize, beta: f64, samples: u64, rng_seed: u64) -> Result<PolarProfile> {
    log2_exact(n)?;
    check_beta(beta)?;
    if samples < MIN_SAMPLES {
        return Err(Error::usage(format!("samples={samples} below minimum {MIN_SAMPLES}")));
    }
    let chunks = samples.div_ceil(SAMPLES_PER_CHUNK);
    let chunk_len = |c: u64| SAMPLES_PER_CHUNK.min(samples - c * SAMPLES_PER_CHUNK);
    let workers = std::thread::available_parallelism().map_or(1, |w| w.get()).min(chunks as usize);
    let mut results: Vec<Option<(Vec<f64>, Vec<f64>)>> = (0..chunks).map(|_| None).collect();
    if workers <= 1 {
        for c in 0..chunks {
            results[c as usize] = Some(profile_chunk(src, n, rng_seed, c, chunk_len(c)));
        }
    } else {
        let next = std::sync::atomic::AtomicU64::new(0);
        let slots: Vec<std::sync::Mutex<Option<ChunkSums>>> =
            (0..chunks).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let c = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if c >= chunks {
                        break;
                    }
                    let r = profile_chunk(src, n, rng_seed, c, chunk_len(c));
                    *slots[c as usize].lock().unwrap() = Some(r);
                });
            }
        });
        for (c, slot) in slots.into_iter().enumerate() {
            results[c] = slot.into_inner().unwrap();
        }
    }
    let mut ent = vec![0.0f64; n];
    let mut gap = vec![0.0f64; n];
    for r in results {
        let (e, g) = r.expect("every chunk computed");
        for j in 0..n {
            ent[j] += e[j];
            gap[j] += g[j];
        }
    }
    let s = samples as f64;
    for j in 0..n {
        ent[j] /= s;
        gap[j] /= s;
    }
    PolarProfile::from_estimates(src, n, beta, samples, rng_seed, ent, &gap)
}

/// Cache file name for a profile with the given parameters.
pub fn profile_cache_path(dir: &Path, src: SourceModel, n: usize, beta: f64, samples: u64, rng_seed: u64) -> PathBuf {
    dir.join(format!(
        "profile_p{:016x}_n{}_b{:016x}_s{}_r{}.nuhpolr",
        src.p.to_bits(),
        n,
        beta.to_bits(),
        samples,
        rng_seed
    ))
}

/// Load a cached profile or construct and persist it.
pub fn load_or_construct(
    dir: &Path,
    src: SourceModel,
    n: usize,
    beta: f64,
    samples: u64,
    rng_seed: u64,
) -> Result<PolarProfile> {
    let path = profile_cache_path(dir, src, n, beta, samples, rng_seed);
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok(p) = PolarProfile::from_bytes(&bytes) {
            if p.n == n && p.p == src.p && p.beta == beta && p.samples == samples && p.rng_seed == rng_seed {
                return Ok(p);
            }
        }
    }
    let prof = construct_profile(src, n, beta, samples, rng_seed)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("tmp");
    prof.save(&tmp)?;
    std::fs::rename(&tmp, &path)?;
    Ok(prof)
}

/// `M = [A[H_V], A[J_V] ⊕ seed]`.
pub fn source_encode(v: &[u8], seed: &[u8], profile: &PolarProfile) -> Result<Vec<u8>> {
    if v.len() != profile.n {
        return Err(Error::usage(format!("message length {} != n = {}", v.len(), profile.n)));
    }
    if seed.len() != profile.d_j() {
        return Err(Error::usage(format!("seed length {} != d_J = {}", seed.len(), profile.d_j())));
    }
    let a = polar_transform(v)?;
    let mut out = Vec::with_capacity(profile.n_tilde());
    out.extend(profile.h_v.iter().map(|&j| a[j as usize]));
    out.extend(profile.j_v.iter().zip(seed).map(|(&j, &s)| a[j as usize] ^ (s & 1)));
    Ok(out)
}

/// Exact check-node combine `2·atanh(tanh(a/2)·tanh(b/2))` in a stable form.
#[inline]
fn llr_f(a: f64, b: f64) -> f64 {
    let (aa, ab) = (a.abs(), b.abs());
    let sign = if (a < 0.0) != (b < 0.0) { -1.0 } else { 1.0 };
    let mag = aa.min(ab) + (-(aa + ab)).exp().ln_1p() - (-(aa - ab).abs()).exp().ln_1p();
    (sign * mag.max(0.0)).clamp(-LLR_CLAMP, LLR_CLAMP)
}

#[inline]
fn llr_g(a: f64, b: f64, u: u8) -> f64 {
    let v = if u == 0 { b + a } else { b - a };
    v.clamp(-LLR_CLAMP, LLR_CLAMP)
}

// Successive cancellation over one node. `known[j]` holds the bit of A at
// index j when it is not decided by the decoder; decisions are written to
// `u`, partial sums of this node to `x`. `on_leaf` sees every leaf LLR.
fn sc_node(
    llr: &[f64],
    known: &[Option<u8>],
    u: &mut [u8],
    x: &mut [u8],
    on_leaf: &mut dyn FnMut(usize, f64),
    base: usize,
) {
    let len = llr.len();
    if len == 1 {
        on_leaf(base, llr[0]);
        let bit = match known[0] {
            Some(b) => b,
            None => (llr[0] < 0.0) as u8,
        };
        u[0] = bit;
        x[0] = bit;
        return;
    }
    let half = len / 2;
    let (l1, l2) = llr.split_at(half);
    let left: Vec<f64> = l1.iter().zip(l2).map(|(&a, &b)| llr_f(a, b)).collect();
    let (ul, ur) = u.split_at_mut(half);
    let (kl, kr) = known.split_at(half);
    let mut xl = vec![0u8; half];
    sc_node(&left, kl, ul, &mut xl, on_leaf, base);
    let right: Vec<f64> = l1.iter().zip(l2).zip(&xl).map(|((&a, &b), &s)| llr_g(a, b, s)).collect();
    let mut xr = vec![0u8; half];
    sc_node(&right, kr, ur, &mut xr, on_leaf, base + half);
    for i in 0..half {
        x[i] = xl[i] ^ xr[i];
        x[half + i] = xr[i];
    }
}

fn prior_llr(src: SourceModel) -> f64 {
    let p = src.p;
    if p <= 0.0 {
        LLR_CLAMP
    } else if p >= 1.0 {
        -LLR_CLAMP
    } else {
        ((1.0 - p) / p).ln().clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}

/// Reconstruct `v` from `M` and the seed: un-pad the `J_V` bits, decide the
/// `U_V` bits by successive cancellation (ties resolve to 0), and invert the
/// transform.
pub fn source_decode(m: &[u8], seed: &[u8], profile: &PolarProfile, src: SourceModel) -> Result<Vec<u8>> {
    if m.len() != profile.n_tilde() {
        return Err(Error::usage(format!("compressed length {} != n_tilde = {}", m.len(), profile.n_tilde())));
    }
    if seed.len() != profile.d_j() {
        return Err(Error::usage(format!("seed length {} != d_J = {}", seed.len(), profile.d_j())));
    }
    let n = profile.n;
    let mut known: Vec<Option<u8>> = vec![None; n];
    let hv = profile.h_v.len();
    for (k, &j) in profile.h_v.iter().enumerate() {
        known[j as usize] = Some(m[k] & 1);
    }
    for (k, &j) in profile.j_v.iter().enumerate() {
        known[j as usize] = Some((m[hv + k] ^ seed[k]) & 1);
    }
    let a = if profile.u_v.is_empty() {
        known.iter().map(|b| b.unwrap()).collect()
    } else {
        let llr = vec![prior_llr(src); n];
        let mut u = vec![0u8; n];
        let mut x = vec![0u8; n];
        sc_node(&llr, &known, &mut u, &mut x, &mut |_, _| {}, 0);
        u
    };
    polar_transform(&a)
}

/// Genie-aided SC on a concrete block: for every index j, the binary entropy
/// of the exact posterior of `A_j` given the true `A^{j-1}` of this block.
pub fn genie_posterior_entropies(v: &[u8], src: SourceModel) -> Result<Vec<f64>> {
    let a = polar_transform(v)?;
    let n = v.len();
    let known: Vec<Option<u8>> = a.iter().map(|&b| Some(b)).collect();
    let llr = vec![prior_llr(src); n];
    let mut u = vec![0u8; n];
    let mut x = vec![0u8; n];
    let mut out = vec![0.0; n];
    sc_node(&llr, &known, &mut u, &mut x, &mut |j, l| out[j] = entropy_and_gap((0.5 * l).tanh()).0, 0);
    Ok(out)
}
