//! Closed-form calculators and empirical estimators.
//!
//! Rates, seed-length bounds, operation counts and security bounds are plain
//! functions of their parameters. The leakage oracles enumerate a single
//! message column exhaustively (or sample it), the coset check counts
//! consistent codewords, and the distinguishing game plays the indistinguishability
//! experiment against the individually secure layer alone.

use crate::error::{Error, Result};
use crate::is_channel::{ISCode, LinearISCode};
use crate::polar::{delta_n, genie_posterior_entropies, PolarProfile, SourceModel};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// Lower seed-length exponent.
pub const SEED_EXP_LOW: f64 = 0.7214;
/// Upper seed-length exponent.
pub const SEED_EXP_HIGH: f64 = 0.7331;
/// Largest state space [`leakage_exact`] will enumerate.
pub const MAX_EXACT_BITS: usize = 24;

// ---------------------------------------------------------------------------
// Rates
// ---------------------------------------------------------------------------

/// Inputs of the rate against a computationally bounded eavesdropper.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateInputs {
    /// `|H_V| / n`.
    pub hv_frac: f64,
    /// `d_J / n`.
    pub dj_frac: f64,
    pub ell: usize,
    pub c: usize,
    /// Cipher expansion in link units, `r = c·(n_g − c_g)/c_g`.
    pub r: f64,
}

impl RateInputs {
    /// Expansion in link units of `c` links encrypted by an `[n_g, c_g]` cipher.
    pub fn expansion(c: usize, n_g: usize, c_g: usize) -> f64 {
        c as f64 * (n_g as f64 - c_g as f64) / c_g as f64
    }

    /// Fractions taken from a constructed profile.
    pub fn from_profile(p: &PolarProfile, ell: usize, c: usize, r: f64) -> Self {
        Self { hv_frac: p.hv_frac(), dj_frac: p.dj_frac(), ell, c, r }
    }

    fn validate(&self) -> Result<()> {
        let frac_ok = |x: f64| (0.0..=1.0).contains(&x);
        if !frac_ok(self.hv_frac) || !frac_ok(self.dj_frac) || self.r.is_nan() || self.r < 0.0 || self.ell == 0 || self.c == 0 {
            return Err(Error::usage(format!("invalid rate inputs {self:?}")));
        }
        Ok(())
    }
}

fn invert(denominator: f64) -> Result<f64> {
    if denominator <= 0.0 {
        return Err(Error::usage("rate denominator is zero"));
    }
    Ok(1.0 / denominator)
}

/// Rate against an unbounded eavesdropper: `1/(|H_V|/n + 2·d_J/n)`.
pub fn rate_it_eve(hv_frac: f64, dj_frac: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&hv_frac) || !(0.0..=1.0).contains(&dj_frac) {
        return Err(Error::usage(format!("fractions out of range: hv={hv_frac}, dj={dj_frac}")));
    }
    invert(hv_frac + 2.0 * dj_frac)
}

/// Rate against a bounded eavesdropper:
/// `1/(|H_V|/n·(1 + r/ℓ) + d_J/n·(2 + r/ℓ + r/c))`.
pub fn rate_crypto_eve(x: &RateInputs) -> Result<f64> {
    x.validate()?;
    let (l, c) = (x.ell as f64, x.c as f64);
    invert(x.hv_frac * (1.0 + x.r / l) + x.dj_frac * (2.0 + x.r / l + x.r / c))
}

/// Schemes compared in the rate and storage tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Optimal compression, then every link encrypted with McEliece.
    Num,
    /// Optimal compression, then a network wiretap type II code.
    NcWtc2,
    /// Almost uniform compression plus the individually secure code.
    NuIs,
    /// Almost uniform compression, individually secure code, `c` links encrypted.
    NuHuncc,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Num, Scheme::NcWtc2, Scheme::NuIs, Scheme::NuHuncc];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Num => "NUM",
            Scheme::NcWtc2 => "NC-WTC-II",
            Scheme::NuIs => "NU-IS",
            Scheme::NuHuncc => "NU-HUNCC",
        }
    }
}

/// Parameters for [`table1_rates`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Table1Params {
    /// Source entropy `H(V)`; the optimal compressor output is `n·H(V)` bits.
    pub entropy: f64,
    pub hv_frac: f64,
    pub dj_frac: f64,
    pub ell: usize,
    pub c: usize,
    /// Links seen by the unbounded eavesdropper in the wiretap code.
    pub w: usize,
    pub n_g: usize,
    pub c_g: usize,
}

impl Table1Params {
    /// Three files on three servers, `H(V) = 0.9`, McEliece `[1024, 524]`,
    /// with the seed fractions supplied by the caller.
    pub fn storage_example(hv_frac: f64, dj_frac: f64) -> Self {
        Self { entropy: 0.9, hv_frac, dj_frac, ell: 3, c: 1, w: 2, n_g: 1024, c_g: 524 }
    }
}

/// Closed-form rate of each scheme.
pub fn table1_rates(scheme: Scheme, p: &Table1Params) -> Result<f64> {
    if !(p.entropy > 0.0 && p.entropy <= 1.0) || p.c_g == 0 || p.c_g > p.n_g || p.ell == 0 {
        return Err(Error::usage(format!("invalid table parameters {p:?}")));
    }
    match scheme {
        Scheme::Num => Ok(p.c_g as f64 / p.n_g as f64 / p.entropy),
        Scheme::NcWtc2 => {
            if p.w >= p.ell {
                return Err(Error::usage("wiretap code needs w < ell"));
            }
            Ok((p.ell - p.w) as f64 / (p.ell as f64 * p.entropy))
        }
        Scheme::NuIs => rate_it_eve(p.hv_frac, p.dj_frac),
        Scheme::NuHuncc => rate_crypto_eve(&RateInputs {
            hv_frac: p.hv_frac,
            dj_frac: p.dj_frac,
            ell: p.ell,
            c: p.c,
            r: RateInputs::expansion(p.c, p.n_g, p.c_g),
        }),
    }
}

/// `(n^0.7214, n^0.7331)`.
pub fn seed_bounds(n: usize) -> (f64, f64) {
    let n = n as f64;
    (n.powf(SEED_EXP_LOW), n.powf(SEED_EXP_HIGH))
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

/// Parameters for [`complexity_counts`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityParams {
    pub n: usize,
    pub ell: usize,
    pub c: usize,
    pub n_tilde: usize,
    pub d_j: usize,
    pub entropy: f64,
    pub n_g: usize,
    pub c_g: usize,
    pub t: usize,
}

impl ComplexityParams {
    /// McEliece `[1024, 524]`, `t = 50`, with profile-derived sizes.
    pub fn with_profile(p: &PolarProfile, ell: usize, c: usize) -> Self {
        Self {
            n: p.n(),
            ell,
            c,
            n_tilde: p.n_tilde(),
            d_j: p.d_j(),
            entropy: p.source().entropy(),
            n_g: 1024,
            c_g: 524,
            t: 50,
        }
    }
}

/// Binary operation counts per stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageOps {
    pub polar_encode: f64,
    pub polar_decode: f64,
    pub seed_xor: f64,
    pub linear_code: f64,
    pub cipher_encrypt: f64,
    pub cipher_decrypt: f64,
}

impl StageOps {
    pub fn total(&self) -> f64 {
        self.polar_encode
            + self.polar_decode
            + self.seed_xor
            + self.linear_code
            + self.cipher_encrypt
            + self.cipher_decrypt
    }
    pub fn cipher(&self) -> f64 {
        self.cipher_encrypt + self.cipher_decrypt
    }
}

/// Operation counts for the hybrid scheme and for encrypting every link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityReport {
    /// Code rate `c_g/n_g` rounded to two decimals, as used in the cost model.
    pub eta: f64,
    pub encrypt_per_block: f64,
    pub decrypt_per_block: f64,
    pub nu_huncc: StageOps,
    pub num: StageOps,
}

fn eta_hundredths(n_g: usize, c_g: usize) -> f64 {
    (100.0 * c_g as f64 / n_g as f64).round()
}

/// `η·t·n_g·log₂(n_g)/2` per block of `c_g` bits.
pub fn mceliece_encrypt_ops(n_g: usize, c_g: usize, t: usize) -> f64 {
    eta_hundredths(n_g, c_g) * t as f64 * n_g as f64 * (n_g as f64).log2() / 200.0
}

/// `(3 − 2η)·t·n_g·log₂(n_g)` per block of `c_g` bits.
pub fn mceliece_decrypt_ops(n_g: usize, c_g: usize, t: usize) -> f64 {
    (300.0 - 2.0 * eta_hundredths(n_g, c_g)) * t as f64 * n_g as f64 * (n_g as f64).log2() / 100.0
}

/// `3n·log₂(n)/2`.
pub fn polar_encode_ops(n: usize) -> f64 {
    3.0 * n as f64 * (n as f64).log2() / 2.0
}

/// `n·log₂(n)/2`.
pub fn polar_decode_ops(n: usize) -> f64 {
    n as f64 * (n as f64).log2() / 2.0
}

/// Per-stage counts for one frame of `ℓ` messages.
pub fn complexity_counts(p: &ComplexityParams) -> ComplexityReport {
    let l = p.ell as f64;
    let enc = mceliece_encrypt_ops(p.n_g, p.c_g, p.t);
    let dec = mceliece_decrypt_ops(p.n_g, p.c_g, p.t);
    let hybrid_bits = p.c * p.n_tilde + p.ell * p.d_j;
    let hybrid_blocks = hybrid_bits.div_ceil(p.c_g) as f64;
    let nu_huncc = StageOps {
        polar_encode: l * polar_encode_ops(p.n),
        polar_decode: l * polar_decode_ops(p.n),
        seed_xor: l * 2.0 * p.d_j as f64,
        linear_code: p.n_tilde as f64 * l * l * (l - 1.0),
        cipher_encrypt: hybrid_blocks * enc,
        cipher_decrypt: hybrid_blocks * dec,
    };
    let compressed = (p.n as f64 * p.entropy).ceil() as usize;
    let num_blocks = (p.ell * compressed.div_ceil(p.c_g)) as f64;
    let num = StageOps {
        polar_encode: l * polar_encode_ops(p.n),
        polar_decode: l * polar_decode_ops(p.n),
        seed_xor: 0.0,
        linear_code: 0.0,
        cipher_encrypt: num_blocks * enc,
        cipher_decrypt: num_blocks * dec,
    };
    ComplexityReport {
        eta: eta_hundredths(p.n_g, p.c_g) / 100.0,
        encrypt_per_block: enc,
        decrypt_per_block: dec,
        nu_huncc,
        num,
    }
}

// ---------------------------------------------------------------------------
// Security bounds
// ---------------------------------------------------------------------------

/// Parameters for [`security_bounds`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsParams {
    pub n: usize,
    pub beta: f64,
    pub ell: usize,
    pub n_tilde: usize,
    pub mu: usize,
    pub k_w: usize,
    pub c: usize,
    /// Slack exponent of the nonlinear code, `ℓε = ⌈t·log₂ ℓ⌉`.
    pub t: f64,
}

/// Secrecy, reliability, bias and advantage bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport {
    pub delta: f64,
    /// `2·√(2·ñ·ℓ·δ_n)`.
    pub eps_s: f64,
    /// `ℓ·δ_n`.
    pub eps_e: f64,
    /// `ñ·ℓ^{−t/2} + 2·√(2·ñ·ℓ·δ_n)`.
    pub eps_s_nonlinear: f64,
    /// `√(1 − (1 − δ_n)^{ln 4})/2`.
    pub zeta: f64,
    /// `2^{3/2}·2^{−n^β/2}·μ·k_w`.
    pub advantage: f64,
}

pub fn security_bounds(p: &BoundsParams) -> BoundsReport {
    let delta = delta_n(p.n, p.beta);
    let nl = p.n_tilde as f64 * p.ell as f64;
    let eps_s = 2.0 * (2.0 * nl * delta).sqrt();
    let zeta = (1.0 - (1.0 - delta).powf(4f64.ln())).max(0.0).sqrt() / 2.0;
    let half_pow = (-(p.n as f64).powf(p.beta) / 2.0).exp2();
    BoundsReport {
        delta,
        eps_s,
        eps_e: p.ell as f64 * delta,
        eps_s_nonlinear: p.n_tilde as f64 * (p.ell as f64).powf(-p.t / 2.0) + eps_s,
        zeta,
        advantage: 2f64.powf(1.5) * half_pow * p.mu as f64 * p.k_w as f64,
    }
}

// ---------------------------------------------------------------------------
// Leakage oracles
// ---------------------------------------------------------------------------

/// How a leakage value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    ExactEnumeration,
    MonteCarlo,
}

/// Leakage of a message subset to a set of tapped links, for one column.
#[derive(Clone, Debug, PartialEq)]
pub struct LeakageReport {
    pub estimator: Estimator,
    /// `max_m V(p_{Z_W | M_K = m}, p_{Z_W})` with `V` the unnormalized L1 distance.
    pub variational_distance: f64,
    /// `I(M_K; Z_W)` in bits.
    pub mutual_information: f64,
    /// Standard error of the mutual information (zero when exact).
    pub mi_std_error: f64,
    /// Bound on the variational distance: twice the L1 distance of the
    /// message column from uniform (zero for uniform inputs).
    pub bound: f64,
    /// Number of enumerated columns or drawn samples.
    pub samples: u64,
}

// Symbol width and encoder for one column of an IS code.
fn column_codec(code: &ISCode) -> (usize, usize) {
    match code {
        ISCode::Linear(l) => (l.ell(), l.field().mu() as usize),
        ISCode::Nonlinear(n) => (n.ell(), 1),
    }
}

fn encode_symbols(code: &ISCode, m: &[u32], mu: usize) -> Result<Vec<u32>> {
    match code {
        ISCode::Linear(l) => l.encode_column(m),
        ISCode::Nonlinear(n) => {
            let bits: Vec<u8> = m.iter().map(|&s| (s & 1) as u8).collect();
            debug_assert_eq!(mu, 1);
            Ok(n.encode(&bits)?.into_iter().map(u32::from).collect())
        }
    }
}

fn check_subsets(ell: usize, w: &[usize], k: &[usize]) -> Result<()> {
    let ok =
        |s: &[usize]| s.iter().all(|&i| i < ell) && s.iter().collect::<std::collections::HashSet<_>>().len() == s.len();
    if !ok(w) || !ok(k) || w.len() >= ell {
        return Err(Error::usage("link and message subsets must be distinct indices below ell, with |W| < ell"));
    }
    Ok(())
}

fn column_prob(sym: &[u32], mu: usize, q: f64) -> f64 {
    let ones: u32 = sym.iter().map(|s| s.count_ones()).sum();
    let zeros = (sym.len() * mu) as u32 - ones;
    q.powi(ones as i32) * (1.0 - q).powi(zeros as i32)
}

fn pack(sym: &[u32], idx: &[usize], mu: usize) -> u64 {
    idx.iter().fold(0u64, |acc, &i| (acc << mu) | sym[i] as u64)
}

fn unpack_column(x: u64, ell: usize, mu: usize) -> Vec<u32> {
    let mask = (1u64 << mu) - 1;
    (0..ell).map(|i| ((x >> (mu * (ell - 1 - i))) & mask) as u32).collect()
}

/// Exact leakage for one column whose message bits are i.i.d. with
/// `P(1) = q`. Only binary-extension (or bit-level nonlinear) codes are
/// enumerated, and only when `ℓ·μ ≤ 24`.
pub fn leakage_exact(code: &ISCode, q: f64, w_links: &[usize], k_msgs: &[usize]) -> Result<LeakageReport> {
    let (ell, mu) = column_codec(code);
    if let ISCode::Linear(l) = code {
        if l.field().order() != 1 << mu {
            return Err(Error::usage("exact leakage enumerates binary-extension fields only"));
        }
    }
    if ell * mu > MAX_EXACT_BITS {
        return Err(Error::usage(format!(
            "state space 2^{} exceeds 2^{MAX_EXACT_BITS}; use the Monte-Carlo estimator",
            ell * mu
        )));
    }
    check_subsets(ell, w_links, k_msgs)?;
    let mut joint: HashMap<(u64, u64), f64> = HashMap::new();
    let mut l1_uniform = 0.0;
    let uniform = (-((ell * mu) as f64)).exp2();
    for x in 0..(1u64 << (ell * mu)) {
        let m = unpack_column(x, ell, mu);
        let pm = column_prob(&m, mu, q);
        l1_uniform += (pm - uniform).abs();
        if pm == 0.0 {
            continue;
        }
        let z = encode_symbols(code, &m, mu)?;
        *joint.entry((pack(&m, k_msgs, mu), pack(&z, w_links, mu))).or_default() += pm;
    }
    let (vd, mi) = leakage_from_joint(&joint);
    Ok(LeakageReport {
        estimator: Estimator::ExactEnumeration,
        variational_distance: vd,
        mutual_information: mi,
        mi_std_error: 0.0,
        bound: 2.0 * l1_uniform,
        samples: 1 << (ell * mu),
    })
}

// Max-over-messages L1 distance and mutual information from a joint table.
fn leakage_from_joint(joint: &HashMap<(u64, u64), f64>) -> (f64, f64) {
    let mut pa: HashMap<u64, f64> = HashMap::new();
    let mut pz: HashMap<u64, f64> = HashMap::new();
    for (&(a, z), &p) in joint {
        *pa.entry(a).or_default() += p;
        *pz.entry(z).or_default() += p;
    }
    let mut mi = 0.0;
    for (&(a, z), &p) in joint {
        if p > 0.0 {
            mi += p * (p / (pa[&a] * pz[&z])).log2();
        }
    }
    let mut vd: f64 = 0.0;
    for (&a, &p_a) in &pa {
        let mut l1 = 0.0;
        for (&z, &p_z) in &pz {
            let pj = joint.get(&(a, z)).copied().unwrap_or(0.0);
            l1 += (pj / p_a - p_z).abs();
        }
        vd = vd.max(l1);
    }
    (vd, mi.max(0.0))
}

/// Monte-Carlo leakage: plug-in mutual information with the Miller–Madow
/// correction on each entropy term, and a delta-method standard error.
pub fn leakage_monte_carlo(
    code: &ISCode,
    q: f64,
    w_links: &[usize],
    k_msgs: &[usize],
    samples: u64,
    rng: &mut dyn RngCore,
) -> Result<LeakageReport> {
    let (ell, mu) = column_codec(code);
    check_subsets(ell, w_links, k_msgs)?;
    if samples < 2 {
        return Err(Error::usage("need at least two samples"));
    }
    let mut counts: HashMap<(u64, u64), u64> = HashMap::new();
    for _ in 0..samples {
        let m: Vec<u32> =
            (0..ell).map(|_| (0..mu).fold(0u32, |acc, b| acc | (u32::from(rng.gen_bool(q)) << b))).collect();
        let z = encode_symbols(code, &m, mu)?;
        *counts.entry((pack(&m, k_msgs, mu), pack(&z, w_links, mu))).or_default() += 1;
    }
    let n = samples as f64;
    let mut ca: HashMap<u64, u64> = HashMap::new();
    let mut cz: HashMap<u64, u64> = HashMap::new();
    for (&(a, z), &c) in &counts {
        *ca.entry(a).or_default() += c;
        *cz.entry(z).or_default() += c;
    }
    let mm = |bins: usize| (bins as f64 - 1.0) / (2.0 * n * std::f64::consts::LN_2);
    let plug = |it: &mut dyn Iterator<Item = u64>| -> f64 {
        it.map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
    };
    let h_a = plug(&mut ca.values().copied()) + mm(ca.len());
    let h_z = plug(&mut cz.values().copied()) + mm(cz.len());
    let h_az = plug(&mut counts.values().copied()) + mm(counts.len());
    let mi = h_a + h_z - h_az;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (&(a, z), &c) in &counts {
        let p = c as f64 / n;
        let term = (p / (ca[&a] as f64 / n * cz[&z] as f64 / n)).log2();
        s1 += p * term;
        s2 += p * term * term;
    }
    let se = ((s2 - s1 * s1).max(0.0) / n).sqrt();
    let joint: HashMap<(u64, u64), f64> = counts.iter().map(|(&k, &c)| (k, c as f64 / n)).collect();
    let (vd, _) = leakage_from_joint(&joint);
    let bits = (ell * mu) as f64;
    let kl = bits * (1.0 - crate::polar::binary_entropy(q));
    Ok(LeakageReport {
        estimator: Estimator::MonteCarlo,
        variational_distance: vd,
        mutual_information: mi,
        mi_std_error: se,
        // Pinsker on the column's divergence from uniform.
        bound: 2.0 * (2.0 * kl * std::f64::consts::LN_2).sqrt(),
        samples,
    })
}

// ---------------------------------------------------------------------------
// Coset counts
// ---------------------------------------------------------------------------

/// Per-coset numbers of codewords consistent with an observation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetCounts {
    /// `counts[m]` for every value `m` of the protected symbols.
    pub counts: Vec<u64>,
    /// `|F|^{ℓ − |W| − k_s}`.
    pub expected: u64,
}

impl CosetCounts {
    pub fn all_equal(&self) -> bool {
        self.counts.iter().all(|&c| c == self.expected)
    }
}

/// For the observation `z` on links `w_links`, count, for every value of
/// the protected symbols `M_1..M_{k_s}`, the unprotected completions whose
/// codeword matches `z`.
pub fn coset_count_check(code: &LinearISCode, w_links: &[usize], observed: &[u32]) -> Result<CosetCounts> {
    let f = code.field();
    let (ell, k_s) = (code.ell(), code.k_s());
    let q = f.order() as u64;
    check_subsets(ell, w_links, &[])?;
    if observed.len() != w_links.len() || w_links.len() > ell - k_s {
        return Err(Error::usage("observation must match the tapped links, and |W| <= ell - k_s"));
    }
    let states = (q as f64).powi(ell as i32);
    if states > (1u64 << MAX_EXACT_BITS) as f64 {
        return Err(Error::usage("coset enumeration too large"));
    }
    let cosets = q.pow(k_s as u32);
    let mut counts = vec![0u64; cosets as usize];
    let mut m = vec![0u32; ell];
    for x in 0..q.pow(ell as u32) {
        let mut r = x;
        for s in m.iter_mut().rev() {
            *s = (r % q) as u32;
            r /= q;
        }
        let z = code.encode_column(&m)?;
        if w_links.iter().zip(observed).all(|(&i, &o)| z[i] == o) {
            let coset = m[..k_s].iter().fold(0u64, |acc, &s| acc * q + s as u64);
            counts[coset as usize] += 1;
        }
    }
    Ok(CosetCounts { counts, expected: q.pow((ell - w_links.len() - k_s) as u32) })
}

// ---------------------------------------------------------------------------
// Distinguishing game
// ---------------------------------------------------------------------------

/// Outcome of [`distinguish_game`].
#[derive(Clone, Debug, PartialEq)]
pub struct GameReport {
    pub trials: u64,
    pub wins: u64,
    /// `|wins/trials − 1/2|`.
    pub advantage: f64,
    /// Standard deviation of the win rate under a fair coin, `1/(2√trials)`.
    pub sigma: f64,
    /// `p_max/(p_max + p_min) − 1/2` with `p_max = max(q, 1−q)^{μ·k_w}`.
    pub closed_form: f64,
    /// True when no unknown symbols remain (`k_w = 0`).
    pub degenerate: bool,
}

/// Advantage of the best single-codeword guess, `p_max/(p_max + p_min) − 1/2`.
pub fn advantage_closed_form(q: f64, mu: usize, k_w: usize) -> f64 {
    let hi = q.max(1.0 - q).powi((mu * k_w) as i32);
    let lo = q.min(1.0 - q).powi((mu * k_w) as i32);
    hi / (hi + lo) - 0.5
}

/// Indistinguishability experiment against the individually secure layer.
///
/// The cipher is treated as ideal, so the adversary sees only the `w`
/// unencrypted links `c..ℓ` (with `c = k_s`) and is additionally handed the
/// protected symbols other than `i_star`. Each trial draws two distinct
/// candidates for position `i_star`, a hidden bit `h`, and unprotected
/// symbols with i.i.d. bits of bias `q`. The adversary guesses `h` by
/// maximum likelihood over the consistent completions (ties broken by a
/// fair coin).
pub fn distinguish_game(code: &LinearISCode, q: f64, i_star: usize, trials: u64, rng_seed: u64) -> Result<GameReport> {
    let f = code.field().clone();
    let (ell, k_s) = (code.ell(), code.k_s());
    let mu = f.mu() as usize;
    if i_star >= k_s {
        return Err(Error::usage(format!("i_star={i_star} must index a protected symbol (< {k_s})")));
    }
    if f.order() != 1 << mu {
        return Err(Error::usage("game runs over binary-extension fields"));
    }
    let k_w = ell - k_s;
    let q_order = f.order() as u64;
    if (q_order as f64).powi(k_w as i32) > (1u64 << MAX_EXACT_BITS) as f64 {
        return Err(Error::usage("too many unprotected completions to enumerate"));
    }
    let visible: Vec<usize> = (k_s..ell).collect();
    // Contribution of the unprotected symbols to the visible links, indexed
    // by the packed visible word.
    let mut completions: HashMap<u64, Vec<(Vec<u32>, f64)>> = HashMap::new();
    let mut m = vec![0u32; ell];
    for x in 0..q_order.pow(k_w as u32) {
        let mut r = x;
        for s in m[k_s..].iter_mut().rev() {
            *s = (r % q_order) as u32;
            r /= q_order;
        }
        for s in m[..k_s].iter_mut() {
            *s = 0;
        }
        let z = code.encode_column(&m)?;
        let p = column_prob(&m[k_s..], mu, q);
        completions.entry(pack(&z, &visible, mu)).or_default().push((m[k_s..].to_vec(), p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut wins = 0u64;
    let draw_symbol = |rng: &mut ChaCha8Rng| (0..mu).fold(0u32, |acc, b| acc | (u32::from(rng.gen_bool(q)) << b));
    for _ in 0..trials {
        let a = rng.gen_range(0..q_order as u32);
        let b = loop {
            let b = rng.gen_range(0..q_order as u32);
            if b != a {
                break b;
            }
        };
        let h = rng.gen_bool(0.5);
        let mut col = vec![0u32; ell];
        for (i, s) in col.iter_mut().enumerate() {
            *s = if i < k_s { rng.gen_range(0..q_order as u32) } else { draw_symbol(&mut rng) };
        }
        col[i_star] = if h { b } else { a };
        let z = code.encode_column(&col)?;
        // Likelihood of each hypothesis: the protected part contributes a
        // known shift, the completions are looked up by the residual.
        let score = |cand: u32| -> Result<f64> {
            let mut known = col.clone();
            known[i_star] = cand;
            for s in known[k_s..].iter_mut() {
                *s = 0;
            }
            let shift = code.encode_column(&known)?;
            let residual: Vec<u32> = (0..ell).map(|i| f.sub(z[i], shift[i])).collect();
            Ok(completions.get(&pack(&residual, &visible, mu)).map_or(0.0, |v| v.iter().map(|(_, p)| p).sum()))
        };
        let (sa, sb) = (score(a)?, score(b)?);
        let guess = if sa > sb {
            false
        } else if sb > sa {
            true
        } else {
            rng.gen_bool(0.5)
        };
        wins += u64::from(guess == h);
    }
    let rate = wins as f64 / trials.max(1) as f64;
    Ok(GameReport {
        trials,
        wins,
        advantage: (rate - 0.5).abs(),
        sigma: 0.5 / (trials.max(1) as f64).sqrt(),
        closed_form: advantage_closed_form(q, mu, k_w),
        degenerate: k_w == 0,
    })
}

// ---------------------------------------------------------------------------
// Uniformity of the compressed output
// ---------------------------------------------------------------------------

/// Estimate of the divergence of compressed messages from uniform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformityEstimate {
    /// `Σ_{j ∈ H_V} (1 − H(A_j | A^{j−1}))`, which upper-bounds `ñ − H(M)`
    /// because the seeded positions are exactly uniform.
    pub kl: f64,
    pub std_error: f64,
    /// `ñ·δ_n`.
    pub bound: f64,
    pub samples: u64,
}

/// Average, over sampled source blocks, of the exact per-index entropy gap
/// on the transmitted high-entropy positions.
pub fn uniformity_kl(profile: &PolarProfile, samples: u64, rng_seed: u64) -> Result<UniformityEstimate> {
    let src = profile.source();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (mut s1, mut s2) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let v = src.sample(profile.n(), &mut rng);
        let h = genie_posterior_entropies(&v, src)?;
        let gap: f64 = profile.h_v().iter().map(|&j| 1.0 - h[j as usize]).sum();
        s1 += gap;
        s2 += gap * gap;
    }
    let n = samples.max(1) as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(UniformityEstimate {
        kl: mean,
        std_error: (var / n).sqrt(),
        bound: profile.n_tilde() as f64 * profile.delta(),
        samples,
    })
}

// ---------------------------------------------------------------------------
// Figure sweeps and CSV output
// ---------------------------------------------------------------------------

/// A CSV table with a leading `#` comment describing the columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(comment: &str, header: &[&str]) -> Self {
        Self { comment: comment.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column values parsed as `f64`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut out = out;
        writeln!(out, "# {}", self.comment)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

/// Provides a profile for a given source and block length.
pub type ProfileFn<'a> = dyn FnMut(SourceModel, usize) -> Result<PolarProfile> + 'a;

/// File name of each figure's CSV.
pub fn figure_file(figure: u32) -> Option<&'static str> {
    Some(match figure {
        2 => "fig2_seed.csv",
        3 => "fig3_rate_vs_size.csv",
        4 => "fig4_rate_vs_links.csv",
        5 => "fig5_rate_vs_entropy.csv",
        6 => "fig6_ops_vs_links.csv",
        _ => return None,
    })
}

/// Seed length against block length.
pub fn fig2_seed(ns: &[usize], entropy: f64, profiles: &mut ProfileFn) -> Result<Table> {
    let src = SourceModel::from_entropy(entropy)?;
    let mut t = Table::new(
        &format!("seed length vs block length, H(V)={entropy}: n, |H_V|, d_J, n_tilde, d_J/n_tilde, n^{SEED_EXP_LOW}, n^{SEED_EXP_HIGH}"),
        &["n", "hv", "d_j", "n_tilde", "dj_over_ntilde", "seed_low", "seed_high"],
    );
    for &n in ns {
        let p = profiles(src, n)?;
        let (lo, hi) = seed_bounds(n);
        t.push(vec![
            n.to_string(),
            p.h_v().len().to_string(),
            p.d_j().to_string(),
            p.n_tilde().to_string(),
            fmt(p.d_j() as f64 / p.n_tilde().max(1) as f64),
            fmt(lo),
            fmt(hi),
        ]);
    }
    Ok(t)
}

fn rate_row(p: &PolarProfile, entropy: f64, ell: usize, c: usize) -> Result<[f64; 5]> {
    let t1 =
        Table1Params { entropy, hv_frac: p.hv_frac(), dj_frac: p.dj_frac(), ell, c, w: ell - c, n_g: 1024, c_g: 524 };
    Ok([
        1.0 / entropy,
        table1_rates(Scheme::NuIs, &t1)?,
        table1_rates(Scheme::NuHuncc, &t1)?,
        table1_rates(Scheme::Num, &t1)?,
        table1_rates(Scheme::NcWtc2, &t1)?,
    ])
}

const RATE_COLUMNS: [&str; 5] = ["optimal", "nu_is", "nu_huncc", "num", "nc_wtc2"];

/// Rates against block length.
pub fn fig3_rate_vs_size(ns: &[usize], entropy: f64, ell: usize, c: usize, profiles: &mut ProfileFn) -> Result<Table> {
    let src = SourceModel::from_entropy(entropy)?;
    let mut header = vec!["n"];
    header.extend(RATE_COLUMNS);
    let mut t = Table::new(
        &format!(
            "rate vs block length, ell={ell}, c={c}, H(V)={entropy}, McEliece [1024,524]; wiretap code with w=ell-c"
        ),
        &header,
    );
    for &n in ns {
        let r = rate_row(&profiles(src, n)?, entropy, ell, c)?;
        let mut row = vec![n.to_string()];
        row.extend(r.iter().map(|&x| fmt(x)));
        t.push(row);
    }
    Ok(t)
}

/// Rates against the number of links.
pub fn fig4_rate_vs_links(ells: &[usize], n: usize, entropy: f64, c: usize, profiles: &mut ProfileFn) -> Result<Table> {
    let p = profiles(SourceModel::from_entropy(entropy)?, n)?;
    let mut header = vec!["ell"];
    header.extend(RATE_COLUMNS);
    let mut t = Table::new(
        &format!(
            "rate vs number of links, n={n}, c={c}, H(V)={entropy}, McEliece [1024,524]; wiretap code with w=ell-c"
        ),
        &header,
    );
    for &ell in ells {
        if ell <= c {
            continue;
        }
        let r = rate_row(&p, entropy, ell, c)?;
        let mut row = vec![ell.to_string()];
        row.extend(r.iter().map(|&x| fmt(x)));
        t.push(row);
    }
    Ok(t)
}

/// Rates against source entropy.
pub fn fig5_rate_vs_entropy(
    entropies: &[f64],
    n: usize,
    ell: usize,
    c: usize,
    profiles: &mut ProfileFn,
) -> Result<Table> {
    let mut header = vec!["entropy"];
    header.extend(RATE_COLUMNS);
    let mut t = Table::new(
        &format!("rate vs source entropy, n={n}, ell={ell}, c={c}, McEliece [1024,524]; wiretap code with w=ell-c"),
        &header,
    );
    for &h in entropies {
        let r = rate_row(&profiles(SourceModel::from_entropy(h)?, n)?, h, ell, c)?;
        let mut row = vec![fmt(h)];
        row.extend(r.iter().map(|&x| fmt(x)));
        t.push(row);
    }
    Ok(t)
}

/// Binary operations against the number of links.
pub fn fig6_ops_vs_links(ells: &[usize], n: usize, entropy: f64, c: usize, profiles: &mut ProfileFn) -> Result<Table> {
    let p = profiles(SourceModel::from_entropy(entropy)?, n)?;
    let mut t = Table::new(
        &format!("binary operations vs number of links, n={n}, c={c}, H(V)={entropy}, McEliece [1024,524] t=50"),
        &["ell", "num_total", "num_cipher", "nu_huncc_total", "nu_huncc_cipher_data", "nu_huncc_cipher_seed"],
    );
    for &ell in ells {
        if ell <= c {
            continue;
        }
        let params = ComplexityParams::with_profile(&p, ell, c);
        let r = complexity_counts(&params);
        // Split the hybrid cipher cost into the data part (constant in ell)
        // and the seed part (which grows with ell).
        let per_block = r.encrypt_per_block + r.decrypt_per_block;
        let data = (c * p.n_tilde()).div_ceil(params.c_g) as f64 * per_block;
        t.push(vec![
            ell.to_string(),
            fmt(r.num.total()),
            fmt(r.num.cipher()),
            fmt(r.nu_huncc.total()),
            fmt(data),
            fmt(r.nu_huncc.cipher() - data),
        ]);
    }
    Ok(t)
}

/// Closed-form rate table for the storage example.
pub fn table1(params: &Table1Params) -> Result<Table> {
    let mut t = Table::new(
        &format!(
            "scheme rates: H(V)={}, |H_V|/n={:.6}, d_J/n={:.6}, ell={}, c={}, w={}, cipher [{}, {}]",
            params.entropy, params.hv_frac, params.dj_frac, params.ell, params.c, params.w, params.n_g, params.c_g
        ),
        &["scheme", "rate"],
    );
    for s in Scheme::ALL {
        t.push(vec![s.label().to_string(), fmt(table1_rates(s, params)?)]);
    }
    Ok(t)
}

/// Bounds as a two-column table.
pub fn bounds_table(p: &BoundsParams) -> Table {
    let b = security_bounds(p);
    let mut t = Table::new(
        &format!(
            "security bounds: n={}, beta={}, ell={}, n_tilde={}, mu={}, k_w={}, c={}, t={}",
            p.n, p.beta, p.ell, p.n_tilde, p.mu, p.k_w, p.c, p.t
        ),
        &["quantity", "value"],
    );
    for (k, v) in [
        ("delta_n", b.delta),
        ("eps_s", b.eps_s),
        ("eps_e", b.eps_e),
        ("eps_s_nonlinear", b.eps_s_nonlinear),
        ("zeta", b.zeta),
        ("advantage", b.advantage),
    ] {
        t.push(vec![k.to_string(), format!("{v:.9e}")]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use crate::is_channel::{CodebookMode, LinearOptions, NonlinearISCode};
    use crate::polar::construct_profile;
    use itertools::Itertools;

    #[test]
    fn rate_formulas() {
        assert!((rate_it_eve(0.9, 0.0).unwrap() - 1.0 / 0.9).abs() < 1e-12);
        assert_eq!(rate_it_eve(1.0, 0.0).unwrap(), 1.0);
        // 1/(0.9 + 0.044)
        assert!((rate_it_eve(0.9, 0.022).unwrap() - 1.059_322).abs() < 1e-5);
        assert!(rate_it_eve(0.0, 0.0).is_err());
        for (hv, dj) in [(0.9, 0.0), (0.7, 0.05), (0.99, 0.001)] {
            for ell in 2..12 {
                let x = RateInputs { hv_frac: hv, dj_frac: dj, ell, c: 1, r: 0.0 };
                assert_eq!(rate_crypto_eve(&x).unwrap(), rate_it_eve(hv, dj).unwrap());
            }
        }
        let mut prev = 0.0;
        for ell in 2..40 {
            let r = rate_crypto_eve(&RateInputs { hv_frac: 0.89, dj_frac: 0.02, ell, c: 1, r: 0.954 }).unwrap();
            assert!(r > prev);
            prev = r;
        }
        assert!(prev < rate_it_eve(0.89, 0.02).unwrap());
        assert!((RateInputs::expansion(1, 1024, 524) - 500.0 / 524.0).abs() < 1e-12);
    }

    #[test]
    fn table_rates_closed_forms() {
        let p = Table1Params::storage_example(0.9, 0.0);
        assert!((table1_rates(Scheme::Num, &p).unwrap() - 524.0 / 1024.0 / 0.9).abs() < 1e-12);
        assert!((table1_rates(Scheme::NcWtc2, &p).unwrap() - 1.0 / 2.7).abs() < 1e-12);
        assert_eq!(table1_rates(Scheme::NuIs, &p).unwrap(), rate_it_eve(0.9, 0.0).unwrap());
        assert_eq!(table1(&p).unwrap().rows.len(), 4);
    }

    #[test]
    fn seed_bounds_values() {
        let (lo, hi) = seed_bounds(1 << 19);
        // 2^(19·0.7214) and 2^(19·0.7331), evaluated via exp2 independently.
        assert!((lo - (19.0 * 0.7214f64).exp2()).abs() < 1e-6);
        assert!((hi - (19.0 * 0.7331f64).exp2()).abs() < 1e-6);
        assert!((lo - 13_369.0).abs() < 1.0);
        assert!((hi - 15_596.0).abs() < 1.0);
        assert_eq!(seed_bounds(1), (1.0, 1.0));
    }

    #[test]
    fn complexity_reference_values() {
        assert_eq!(mceliece_encrypt_ops(1024, 524, 50), 130_560.0);
        assert_eq!(mceliece_decrypt_ops(1024, 524, 50), 1_013_760.0);
        assert_eq!(polar_encode_ops(1024), 15_360.0);
        let p =
            ComplexityParams { n: 1024, ell: 4, c: 1, n_tilde: 950, d_j: 20, entropy: 0.9, n_g: 1024, c_g: 524, t: 50 };
        let r = complexity_counts(&p);
        assert_eq!(r.nu_huncc.linear_code, 950.0 * 16.0 * 3.0);
        assert_eq!(r.nu_huncc.cipher_encrypt, 2.0 * 130_560.0);
        assert_eq!(r.num.cipher_encrypt, 4.0 * 2.0 * 130_560.0);
        let s = r.nu_huncc;
        assert_eq!(
            s.total(),
            s.polar_encode + s.polar_decode + s.seed_xor + s.linear_code + s.cipher_encrypt + s.cipher_decrypt
        );
    }

    #[test]
    fn polar_counter_matches_closed_form() {
        for n in [2usize, 16, 256, 1024] {
            let mut ops = crate::polar::PolarOps::default();
            crate::polar::polar_transform_counted(&vec![1u8; n], &mut ops).unwrap();
            assert_eq!(ops.total() as f64, polar_encode_ops(n));
        }
    }

    #[test]
    fn bounds_values_and_monotonicity() {
        let base = BoundsParams { n: 1024, beta: 0.3, ell: 4, n_tilde: 950, mu: 4, k_w: 3, c: 1, t: 1.0 };
        let b = security_bounds(&base);
        assert!((b.eps_e - 0.015625).abs() < 1e-12);
        assert!((b.eps_s - 2.0 * (2.0 * 950.0 * 4.0 / 256.0f64).sqrt()).abs() < 1e-12);
        let zero = security_bounds(&BoundsParams { beta: 0.49, n: 1 << 30, ..base });
        assert!(zero.zeta < 1e-9 && zero.eps_e < 1e-9);
        let mut prev = security_bounds(&BoundsParams { n: 64, ..base });
        for m in 7..24 {
            let cur = security_bounds(&BoundsParams { n: 1 << m, ..base });
            assert!(
                cur.eps_s <= prev.eps_s
                    && cur.eps_e <= prev.eps_e
                    && cur.zeta <= prev.zeta
                    && cur.advantage <= prev.advantage
            );
            prev = cur;
        }
        for ell in 2..10 {
            let a = security_bounds(&BoundsParams { ell, ..base });
            let b = security_bounds(&BoundsParams { ell: ell + 1, ..base });
            assert!(b.eps_s > a.eps_s && b.eps_e > a.eps_e);
            let c = security_bounds(&BoundsParams { n_tilde: 951, ell, ..base });
            assert!(c.eps_s > a.eps_s);
        }
    }

    #[test]
    fn exact_leakage_zero_for_every_subset_pair() {
        for (ell, mu) in [(2usize, 2u32), (3, 3), (3, 4), (4, 4)] {
            let f = FieldSpec::binary(mu).unwrap();
            for k_s in 1..ell {
                let w = ell - k_s;
                let opts = LinearOptions { construction: None, all_subsets_secure: true };
                let code = ISCode::Linear(LinearISCode::build_with(&f, ell, k_s, 5, opts).unwrap());
                for wl in (0..ell).combinations(w) {
                    for ks in (0..ell).combinations(k_s) {
                        let r = leakage_exact(&code, 0.5, &wl, &ks).unwrap();
                        assert_eq!(r.mutual_information, 0.0, "ell={ell} mu={mu} W={wl:?} K={ks:?}");
                        assert!(r.variational_distance < 1e-12);
                        assert!(r.bound < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_leakage_biased_inputs_within_bound() {
        let f = FieldSpec::binary(3).unwrap();
        let code = ISCode::Linear(LinearISCode::build(&f, 3, 1, 2).unwrap());
        for q in [0.45, 0.4, 0.3, 0.1] {
            for wl in (0..3).combinations(2) {
                let r = leakage_exact(&code, q, &wl, &[0]).unwrap();
                assert!(r.variational_distance <= r.bound + 1e-12, "q={q} {r:?}");
            }
        }
        // With no taps there is nothing to leak.
        let r = leakage_exact(&code, 0.1, &[], &[0]).unwrap();
        assert!(r.variational_distance < 1e-12);
        // A leaking map: observing every protected symbol directly.
        let id = ISCode::Linear(LinearISCode::from_g_is(crate::gf::FieldMatrix::identity(&f, 3), 1).unwrap());
        assert!(leakage_exact(&id, 0.5, &[0, 1], &[0]).unwrap().mutual_information > 2.9);
        let big = ISCode::Linear(LinearISCode::build(&FieldSpec::binary(9).unwrap(), 3, 1, 1).unwrap());
        assert!(leakage_exact(&big, 0.5, &[0], &[0]).is_err());
    }

    #[test]
    fn nonlinear_and_monte_carlo_leakage() {
        let code = ISCode::Nonlinear(NonlinearISCode::build(4, 1, 0, 3, CodebookMode::Distinct).unwrap());
        let exact = leakage_exact(&code, 0.5, &[2], &[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mc = leakage_monte_carlo(&code, 0.5, &[2], &[0], 200_000, &mut rng).unwrap();
        assert!(
            (mc.mutual_information - exact.mutual_information).abs() <= 4.0 * mc.mi_std_error + 1e-4,
            "{mc:?} vs {exact:?}"
        );
        let f = FieldSpec::binary(3).unwrap();
        let lin = ISCode::Linear(LinearISCode::build(&f, 3, 1, 2).unwrap());
        let mc = leakage_monte_carlo(&lin, 0.5, &[1, 2], &[0], 100_000, &mut rng).unwrap();
        // Zero true leakage; the corrected estimate is within noise of zero.
        assert!(mc.mutual_information.abs() < 0.01, "{mc:?}");
    }

    #[test]
    fn coset_counts_equal() {
        let f = FieldSpec::binary(2).unwrap();
        let code = LinearISCode::build(&f, 3, 1, 4).unwrap();
        for z in 0..4u32 {
            for link in 0..3 {
                let c = coset_count_check(&code, &[link], &[z]).unwrap();
                assert_eq!(c.expected, 4);
                assert!(c.all_equal(), "{c:?}");
            }
        }
        let c = coset_count_check(&code, &[], &[]).unwrap();
        assert_eq!(c.expected, 16);
        assert!(c.all_equal());
        let tight = coset_count_check(&code, &[1, 2], &[3, 1]).unwrap();
        assert_eq!(tight.expected, 1);
        assert!(tight.all_equal());
    }

    #[test]
    fn distinguishing_game_behaviour() {
        let f = FieldSpec::binary(3).unwrap();
        let code = LinearISCode::build(&f, 3, 1, 7).unwrap();
        let fair = distinguish_game(&code, 0.5, 0, 20_000, 1).unwrap();
        assert!(fair.advantage <= 4.0 * fair.sigma, "{fair:?}");
        assert_eq!(fair.closed_form, 0.0);
        let det = distinguish_game(&code, 0.0, 0, 2_000, 2).unwrap();
        assert_eq!(det.closed_form, 0.5);
        assert!((det.advantage - det.closed_form).abs() < 0.03);
        let mid = distinguish_game(&code, 0.2, 0, 20_000, 3).unwrap();
        assert!(mid.advantage <= mid.closed_form + 4.0 * mid.sigma);
        assert!(distinguish_game(&code, 0.5, 1, 10, 1).is_err());
    }

    #[test]
    fn uniformity_estimate_small_profile() {
        let src = SourceModel::new(0.11).unwrap();
        let prof = construct_profile(src, 64, 0.3, 2000, 1).unwrap();
        let u = uniformity_kl(&prof, 2000, 2).unwrap();
        assert!(u.kl >= 0.0);
        assert!(u.kl <= u.bound + 3.0 * u.std_error, "{u:?}");
    }

    #[test]
    fn csv_tables() {
        let mut cache: HashMap<(u64, usize), PolarProfile> = HashMap::new();
        let mut prof = |s: SourceModel, n: usize| -> Result<PolarProfile> {
            if let Some(p) = cache.get(&(s.p().to_bits(), n)) {
                return Ok(p.clone());
            }
            let p = construct_profile(s, n, 0.1, 1000, 1)?;
            cache.insert((s.p().to_bits(), n), p.clone());
            Ok(p)
        };
        let t2 = fig2_seed(&[256, 1024], 0.9, &mut prof).unwrap();
        let s = t2.to_csv_string();
        assert!(s.starts_with("# seed length"));
        assert_eq!(s.lines().nth(1).unwrap(), "n,hv,d_j,n_tilde,dj_over_ntilde,seed_low,seed_high");
        let t4 = fig4_rate_vs_links(&[2, 3, 4, 10], 1024, 0.9, 1, &mut prof).unwrap();
        let nu_is = t4.column("nu_is").unwrap();
        assert!(nu_is.windows(2).all(|w| w[0] == w[1]));
        let hy = t4.column("nu_huncc").unwrap();
        assert!(hy.windows(2).all(|w| w[0] < w[1]));
        let t6 = fig6_ops_vs_links(&[4, 5, 6], 1024, 0.9, 1, &mut prof).unwrap();
        let num = t6.column("num_cipher").unwrap();
        assert!((num[1] - num[0] - (num[2] - num[1])).abs() < 1e-6);
        let data = t6.column("nu_huncc_cipher_data").unwrap();
        assert!(data.windows(2).all(|w| w[0] == w[1]));
        let t5 = fig5_rate_vs_entropy(&[0.5, 0.9], 256, 8, 1, &mut prof).unwrap();
        assert_eq!(t5.rows.len(), 2);
        let t3 = fig3_rate_vs_size(&[256], 0.9, 8, 1, &mut prof).unwrap();
        assert_eq!(t3.header[0], "n");
        assert_eq!(t2.to_csv_string(), fig2_seed(&[256, 1024], 0.9, &mut prof).unwrap().to_csv_string());
        assert_eq!(figure_file(6), Some("fig6_ops_vs_links.csv"));
        assert_eq!(figure_file(7), None);
    }
}
