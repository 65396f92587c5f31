//! Block ciphers for the encrypted links.
//!
//! [`BlockCipher`] is the plug-in point. [`McEliece`] implements binary Goppa
//! McEliece with Patterson decoding; [`NullCipher`] and [`ToyXorCipher`] are
//! transparent stand-ins used to isolate the coding layers in tests.

use crate::bits::{pack_bits, unpack_bits, weight, BitMatrix};
use crate::error::{Error, Result};
use crate::gf::FieldSpec;
use crate::io::{Reader, Writer};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::path::Path;

/// A fixed-size probabilistic block cipher over bit vectors (one bit per byte).
pub trait BlockCipher: Send + Sync {
    /// Human-readable identifier.
    fn name(&self) -> &str;
    fn plaintext_bits(&self) -> usize;
    fn ciphertext_bits(&self) -> usize;
    fn encrypt_block(&self, m: &[u8], rng: &mut dyn RngCore) -> Result<Vec<u8>>;
    fn decrypt_block(&self, c: &[u8]) -> Result<Vec<u8>>;

    /// Ciphertext surplus per block, `ciphertext_bits − plaintext_bits`.
    fn r_bits(&self) -> usize {
        self.ciphertext_bits() - self.plaintext_bits()
    }
}

fn check_len(got: usize, want: usize, what: &str) -> Result<()> {
    if got != want {
        return Err(Error::usage(format!("{what} block has {got} bits, expected {want}")));
    }
    Ok(())
}

/// Identity cipher with zero expansion.
#[derive(Clone, Debug)]
pub struct NullCipher {
    bits: usize,
}

impl NullCipher {
    pub fn new(bits: usize) -> Self {
        Self { bits }
    }
}

impl BlockCipher for NullCipher {
    fn name(&self) -> &str {
        "null"
    }
    fn plaintext_bits(&self) -> usize {
        self.bits
    }
    fn ciphertext_bits(&self) -> usize {
        self.bits
    }
    fn encrypt_block(&self, m: &[u8], _rng: &mut dyn RngCore) -> Result<Vec<u8>> {
        check_len(m.len(), self.bits, "plaintext")?;
        Ok(m.to_vec())
    }
    fn decrypt_block(&self, c: &[u8]) -> Result<Vec<u8>> {
        check_len(c.len(), self.bits, "ciphertext")?;
        Ok(c.to_vec())
    }
}

/// XOR with a fixed pad derived from a seed. Not secure; a test fixture.
#[derive(Clone, Debug)]
pub struct ToyXorCipher {
    pad: Vec<u8>,
}

impl ToyXorCipher {
    pub fn new(bits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { pad: (0..bits).map(|_| rng.gen::<bool>() as u8).collect() }
    }
}

impl BlockCipher for ToyXorCipher {
    fn name(&self) -> &str {
        "toy-xor"
    }
    fn plaintext_bits(&self) -> usize {
        self.pad.len()
    }
    fn ciphertext_bits(&self) -> usize {
        self.pad.len()
    }
    fn encrypt_block(&self, m: &[u8], _rng: &mut dyn RngCore) -> Result<Vec<u8>> {
        check_len(m.len(), self.pad.len(), "plaintext")?;
        Ok(m.iter().zip(&self.pad).map(|(a, b)| (a ^ b) & 1).collect())
    }
    fn decrypt_block(&self, c: &[u8]) -> Result<Vec<u8>> {
        check_len(c.len(), self.pad.len(), "ciphertext")?;
        Ok(c.iter().zip(&self.pad).map(|(a, b)| (a ^ b) & 1).collect())
    }
}

// ---------------------------------------------------------------------------
// Polynomials over GF(2^d), coefficients low degree first, no trailing zeros.

#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly(Vec<u32>);

impl Poly {
    fn zero() -> Self {
        Poly(Vec::new())
    }
    fn from_coeffs(mut c: Vec<u32>) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        Poly(c)
    }
    #[cfg(test)]
    fn monomial(coef: u32, deg: usize) -> Self {
        let mut c = vec![0; deg + 1];
        c[deg] = coef;
        Self::from_coeffs(c)
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    /// Degree, with the zero polynomial at -1.
    fn deg(&self) -> isize {
        self.0.len() as isize - 1
    }
    fn coef(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }
    fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Self::from_coeffs((0..n).map(|i| self.coef(i) ^ o.coef(i)).collect())
    }
    fn mul(&self, o: &Poly, f: &FieldSpec) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0u32; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                c[i + j] ^= f.mul(a, b);
            }
        }
        Self::from_coeffs(c)
    }
    fn scale(&self, s: u32, f: &FieldSpec) -> Poly {
        Self::from_coeffs(self.0.iter().map(|&a| f.mul(a, s)).collect())
    }
    fn div_rem(&self, d: &Poly, f: &FieldSpec) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.0.clone();
        let dd = d.deg() as usize;
        let lead_inv = f.inv(d.0[dd]).expect("nonzero leading coefficient");
        if self.deg() < d.deg() {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![0u32; r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = r[k + dd];
            if c == 0 {
                continue;
            }
            let factor = f.mul(c, lead_inv);
            q[k] = factor;
            for (j, &dj) in d.0.iter().enumerate() {
                r[k + j] ^= f.mul(factor, dj);
            }
        }
        (Self::from_coeffs(q), Self::from_coeffs(r))
    }
    fn rem(&self, d: &Poly, f: &FieldSpec) -> Poly {
        self.div_rem(d, f).1
    }
    fn eval(&self, x: u32, f: &FieldSpec) -> u32 {
        self.0.iter().rev().fold(0, |acc, &c| f.mul(acc, x) ^ c)
    }
    fn monic(&self, f: &FieldSpec) -> Poly {
        match self.0.last() {
            None => Poly::zero(),
            Some(&l) => self.scale(f.inv(l).expect("nonzero"), f),
        }
    }
    fn gcd(a: &Poly, b: &Poly, f: &FieldSpec) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }
    /// Square in characteristic 2: coefficients squared at doubled positions.
    fn square(&self, f: &FieldSpec) -> Poly {
        let mut c = vec![0u32; (2 * self.0.len()).saturating_sub(1)];
        for (i, &a) in self.0.iter().enumerate() {
            c[2 * i] = f.mul(a, a);
        }
        Self::from_coeffs(c)
    }
    fn inv_mod(&self, g: &Poly, f: &FieldSpec) -> Option<Poly> {
        // Extended Euclid tracking only the coefficient of self.
        let (mut r0, mut r1) = (g.clone(), self.rem(g, f));
        let (mut s0, mut s1) = (Poly::zero(), Poly(vec![1]));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1, f);
            let s = s0.add(&q.mul(&s1, f));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        if r0.deg() != 0 {
            return None;
        }
        Some(s0.scale(f.inv(r0.0[0]).unwrap(), f).rem(g, f))
    }
}

/// Ben-Or test: `g` of degree `t` is irreducible iff
/// `gcd(z^{q^i} − z, g) = 1` for `i = 1..=t/2`, with `q = 2^d`.
fn is_irreducible(g: &Poly, f: &FieldSpec) -> bool {
    let t = g.deg();
    if t <= 0 {
        return false;
    }
    let z = Poly(vec![0, 1]);
    let mut zq = z.clone();
    for _ in 1..=(t / 2) {
        for _ in 0..f.mu() {
            zq = zq.square(f).rem(g, f);
        }
        if Poly::gcd(&zq.add(&z), g, f).deg() != 0 {
            return false;
        }
    }
    true
}

/// Binary Goppa code parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GoppaParams {
    /// Extension degree of the support field GF(2^d).
    pub d: u32,
    /// Code length.
    pub n_g: usize,
    /// Error weight and Goppa polynomial degree.
    pub t: usize,
}

impl GoppaParams {
    pub fn new(d: u32, n_g: usize, t: usize) -> Result<Self> {
        if !(2..=16).contains(&d) {
            return Err(Error::usage(format!("extension degree d={d} outside 2..=16")));
        }
        let q = 1usize << d;
        // A degree-1 polynomial has a root, which must be excluded from the support.
        let max_n = if t == 1 { q - 1 } else { q };
        if n_g == 0 || n_g > max_n {
            return Err(Error::usage(format!("n_g={n_g} outside 1..={max_n} for d={d}, t={t}")));
        }
        if d as usize * t >= n_g {
            return Err(Error::usage(format!("d*t = {} leaves no message space at n_g={n_g}", d as usize * t)));
        }
        Ok(Self { d, n_g, t })
    }

    /// The classic [1024, 524] code with t = 50.
    pub fn classic_1024() -> Self {
        Self { d: 10, n_g: 1024, t: 50 }
    }

    /// Lower bound `n_g − d·t` on the dimension.
    pub fn min_dimension(&self) -> usize {
        self.n_g - self.d as usize * self.t
    }
}

/// Public McEliece key `G_pub = S·G_g·P`.
#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    params: GoppaParams,
    c_g: usize,
    g_pub: BitMatrix,
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey {{ params: {:?}, c_g: {} }}", self.params, self.c_g)
    }
}

/// Secret McEliece key with derived decoding tables.
#[derive(Clone)]
pub struct SecretKey {
    params: GoppaParams,
    c_g: usize,
    field: FieldSpec,
    goppa: Poly,
    support: Vec<u32>,
    // ciphertext position j carries codeword position perm[j]
    perm: Vec<u32>,
    s: BitMatrix,
    // derived
    s_inv: BitMatrix,
    columns: Vec<Poly>,
    info_set: Vec<usize>,
    sqrt_z: Poly,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecretKey {{ params: {:?}, c_g: {} }}", self.params, self.c_g)
    }
}

impl PartialEq for SecretKey {
    fn eq(&self, o: &Self) -> bool {
        self.params == o.params
            && self.goppa == o.goppa
            && self.support == o.support
            && self.perm == o.perm
            && self.s == o.s
            && self.field == o.field
    }
}

/// Public and secret key.
#[derive(Clone, Debug, PartialEq)]
pub struct McElieceKeyPair {
    pub public: PublicKey,
    pub secret: SecretKey,
}

/// Maximum random Goppa polynomials tried before keygen gives up.
pub const MAX_IRREDUCIBLE_ATTEMPTS: usize = 200;

// Parity-check columns (z − L_i)^{-1} mod g, each a polynomial of degree < t.
fn goppa_columns(g: &Poly, support: &[u32], f: &FieldSpec) -> Vec<Poly> {
    let t = g.deg() as usize;
    support
        .iter()
        .map(|&a| {
            // Synthetic division: g(z) − g(a) = (z − a)·Q(z).
            let mut q = vec![0u32; t];
            let mut carry = 0u32;
            for k in (1..=t).rev() {
                carry = f.mul(carry, a) ^ g.coef(k);
                q[k - 1] = carry;
            }
            let ga_inv = f.inv(g.eval(a, f)).expect("support avoids roots of g");
            Poly::from_coeffs(q).scale(ga_inv, f)
        })
        .collect()
}

// Binary parity-check matrix: row k·d + b holds bit b of coefficient k.
fn binary_parity(columns: &[Poly], t: usize, d: u32) -> BitMatrix {
    let mut h = BitMatrix::zeros(t * d as usize, columns.len());
    for (i, col) in columns.iter().enumerate() {
        for k in 0..t {
            let c = col.coef(k);
            for b in 0..d as usize {
                if (c >> b) & 1 == 1 {
                    h.set(k * d as usize + b, i, true);
                }
            }
        }
    }
    h
}

// Systematic generator from the parity check: identity on the free columns.
fn systematic_generator(h: &BitMatrix, n: usize) -> (BitMatrix, Vec<usize>) {
    let mut red = h.clone();
    let pivots = red.row_reduce();
    let free: Vec<usize> = (0..n).filter(|c| pivots.binary_search(c).is_err()).collect();
    let mut g = BitMatrix::zeros(free.len(), n);
    for (k, &fc) in free.iter().enumerate() {
        g.set(k, fc, true);
        for (r, &pc) in pivots.iter().enumerate() {
            if red.get(r, fc) {
                g.set(k, pc, true);
            }
        }
    }
    (g, free)
}

fn sqrt_of_z(g: &Poly, f: &FieldSpec) -> Poly {
    // In GF(2^{dt}) = GF(2^d)[z]/g, sqrt(x) = x^{2^{dt−1}}.
    let t = g.deg() as u32;
    let mut r = Poly(vec![0, 1]).rem(g, f);
    for _ in 0..(f.mu() * t).saturating_sub(1) {
        r = r.square(f).rem(g, f);
    }
    r
}

impl SecretKey {
    fn derive(
        params: GoppaParams,
        field: FieldSpec,
        goppa: Poly,
        support: Vec<u32>,
        perm: Vec<u32>,
        s: BitMatrix,
    ) -> Result<(Self, BitMatrix)> {
        let t = params.t;
        let (columns, g_g, info_set) = if t == 0 {
            (Vec::new(), BitMatrix::identity(params.n_g), (0..params.n_g).collect())
        } else {
            let columns = goppa_columns(&goppa, &support, &field);
            let h = binary_parity(&columns, t, params.d);
            let (g_g, free) = systematic_generator(&h, params.n_g);
            (columns, g_g, free)
        };
        let c_g = info_set.len();
        if s.rows() != c_g || s.cols() != c_g {
            return Err(Error::format("scrambler dimension does not match code dimension"));
        }
        let s_inv = s.inverse().map_err(|_| Error::format("scrambler is singular"))?;
        let sqrt_z = if t == 0 { Poly::zero() } else { sqrt_of_z(&goppa, &field) };
        let sk = Self { params, c_g, field, goppa, support, perm, s, s_inv, columns, info_set, sqrt_z };
        Ok((sk, g_g))
    }

    pub fn params(&self) -> GoppaParams {
        self.params
    }
    pub fn c_g(&self) -> usize {
        self.c_g
    }
    /// Goppa polynomial coefficients, low degree first.
    pub fn goppa_poly(&self) -> &[u32] {
        &self.goppa.0
    }
    pub fn support(&self) -> &[u32] {
        &self.support
    }
    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }

    /// Syndrome polynomial `Σ y_i / (z − L_i) mod g`.
    fn syndrome(&self, y: &[u8]) -> Poly {
        let t = self.params.t;
        let mut acc = vec![0u32; t];
        for (i, &b) in y.iter().enumerate() {
            if b & 1 == 1 {
                for (k, a) in acc.iter_mut().enumerate() {
                    *a ^= self.columns[i].coef(k);
                }
            }
        }
        Poly::from_coeffs(acc)
    }

    /// sqrt(x) mod g from the split x = x_e(z)² + z·x_o(z)².
    fn sqrt_mod(&self, x: &Poly) -> Poly {
        let f = &self.field;
        let half = |start: usize| -> Poly {
            Poly::from_coeffs(x.0.iter().skip(start).step_by(2).map(|&c| f.pow(c, 1u64 << (f.mu() - 1))).collect())
        };
        let even = half(0);
        let odd = half(1);
        even.add(&odd.mul(&self.sqrt_z, f)).rem(&self.goppa, f)
    }

    /// Patterson decoding: error positions of `y` (in codeword order).
    fn patterson(&self, y: &[u8]) -> Result<Vec<usize>> {
        let f = &self.field;
        let g = &self.goppa;
        let t = self.params.t;
        let syn = self.syndrome(y);
        if syn.is_zero() {
            return Ok(Vec::new());
        }
        let inv = syn.inv_mod(g, f).ok_or_else(|| Error::crypto("syndrome not invertible modulo g"))?;
        let tau = self.sqrt_mod(&inv.add(&Poly(vec![0, 1])));
        // Key equation a ≡ b·τ (mod g) with deg a ≤ t/2, deg b ≤ (t−1)/2.
        let (mut r0, mut r1) = (g.clone(), tau);
        let (mut b0, mut b1) = (Poly::zero(), Poly(vec![1]));
        while r1.deg() > (t / 2) as isize {
            let (q, r) = r0.div_rem(&r1, f);
            let b = b0.add(&q.mul(&b1, f));
            r0 = r1;
            r1 = r;
            b0 = b1;
            b1 = b;
        }
        let sigma = r1.square(f).add(&Poly(vec![0, 1]).mul(&b1.square(f), f));
        let deg = sigma.deg();
        if deg < 1 || deg as usize > t {
            return Err(Error::crypto("error locator has invalid degree"));
        }
        let pos: Vec<usize> =
            self.support.iter().enumerate().filter(|(_, &a)| sigma.eval(a, f) == 0).map(|(i, _)| i).collect();
        if pos.len() != deg as usize {
            return Err(Error::crypto(format!("error locator of degree {deg} has {} roots in the support", pos.len())));
        }
        Ok(pos)
    }

    /// Invert `κ = m·G_pub ⊕ a` for `weight(a) ≤ t`; larger errors are
    /// reported as [`Error::Crypto`] whenever the decoder detects them.
    pub fn decrypt(&self, kappa: &[u8]) -> Result<Vec<u8>> {
        let n = self.params.n_g;
        check_len(kappa.len(), n, "ciphertext")?;
        let mut y = vec![0u8; n];
        for (j, &p) in self.perm.iter().enumerate() {
            y[p as usize] = kappa[j] & 1;
        }
        if self.params.t > 0 {
            for i in self.patterson(&y)? {
                y[i] ^= 1;
            }
            if !self.syndrome(&y).is_zero() {
                return Err(Error::crypto("corrected word is not a codeword"));
            }
        }
        let ms: Vec<u8> = self.info_set.iter().map(|&i| y[i]).collect();
        self.s_inv.vec_mul(&ms)
    }
}

impl PublicKey {
    pub fn params(&self) -> GoppaParams {
        self.params
    }
    pub fn c_g(&self) -> usize {
        self.c_g
    }
    pub fn matrix(&self) -> &BitMatrix {
        &self.g_pub
    }

    /// `κ = m·G_pub ⊕ a` with `a` uniform among weight-`t` vectors.
    pub fn encrypt(&self, m: &[u8], rng: &mut dyn RngCore) -> Result<Vec<u8>> {
        self.encrypt_with_errors(m, self.params.t, rng)
    }

    /// Encryption with a chosen error weight (diagnostics and negative tests).
    pub fn encrypt_with_errors(&self, m: &[u8], errors: usize, rng: &mut dyn RngCore) -> Result<Vec<u8>> {
        check_len(m.len(), self.c_g, "plaintext")?;
        let n = self.params.n_g;
        if errors > n {
            return Err(Error::usage("more errors than positions"));
        }
        let mut c = self.g_pub.vec_mul(m)?;
        for i in rand::seq::index::sample(rng, n, errors) {
            c[i] ^= 1;
        }
        Ok(c)
    }
}

impl McElieceKeyPair {
    /// Deterministic key generation from a seed.
    pub fn generate(params: GoppaParams, rng_seed: u64) -> Result<Self> {
        GoppaParams::new(params.d, params.n_g, params.t)?;
        let field = FieldSpec::binary(params.d)?;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let q = field.order();
        let t = params.t;
        let goppa = if t == 0 {
            Poly(vec![1])
        } else {
            let mut found = None;
            for _ in 0..MAX_IRREDUCIBLE_ATTEMPTS {
                // Monic: random low coefficients, leading coefficient 1.
                let c: Vec<u32> = (0..t).map(|_| rng.gen_range(0..q)).chain([1]).collect();
                let cand = Poly::from_coeffs(c);
                if is_irreducible(&cand, &field) {
                    found = Some(cand);
                    break;
                }
            }
            found.ok_or_else(|| {
                Error::construction(format!("no irreducible Goppa polynomial in {MAX_IRREDUCIBLE_ATTEMPTS} attempts"))
            })?
        };
        let mut elems: Vec<u32> = (0..q).filter(|&a| t == 0 || goppa.eval(a, &field) != 0).collect();
        elems.shuffle(&mut rng);
        elems.truncate(params.n_g);
        if elems.len() < params.n_g {
            return Err(Error::construction("not enough non-roots for the support"));
        }
        let mut perm: Vec<u32> = (0..params.n_g as u32).collect();
        perm.shuffle(&mut rng);
        // The dimension is known once the parity check is reduced; S is sampled after.
        let c_g = if t == 0 {
            params.n_g
        } else {
            params.n_g - binary_parity(&goppa_columns(&goppa, &elems, &field), t, params.d).rank()
        };
        let s = loop {
            let mut m = BitMatrix::zeros(c_g, c_g);
            for r in 0..c_g {
                let bits: Vec<u8> = (0..c_g).map(|_| rng.gen::<bool>() as u8).collect();
                m.set_row_bits(r, &bits)?;
            }
            if m.rank() == c_g {
                break m;
            }
        };
        let (secret, g_g) = SecretKey::derive(params, field, goppa, elems, perm, s)?;
        let sg = secret.s.mul(&g_g)?;
        let mut g_pub = BitMatrix::zeros(c_g, params.n_g);
        for r in 0..c_g {
            for (j, &p) in secret.perm.iter().enumerate() {
                if sg.get(r, p as usize) {
                    g_pub.set(r, j, true);
                }
            }
        }
        Ok(Self { public: PublicKey { params, c_g, g_pub }, secret })
    }
}

// ---------------------------------------------------------------------------
// Key files.

const KEY_MAGIC: &[u8; 7] = b"NUHMCE1";
const KIND_PUBLIC: u8 = 0;
const KIND_SECRET: u8 = 1;

fn write_header(w: &mut Writer, kind: u8, p: GoppaParams, c_g: usize) {
    w.bytes(KEY_MAGIC);
    w.u8(kind);
    w.u32(p.d);
    w.u32(p.n_g as u32);
    w.u32(p.t as u32);
    w.u32(c_g as u32);
}

fn read_header(r: &mut Reader, kind: u8) -> Result<(GoppaParams, usize)> {
    r.magic(KEY_MAGIC)?;
    let k = r.u8()?;
    if k != kind {
        return Err(Error::format(format!("key kind {k}, expected {kind}")));
    }
    let (d, n_g, t, c_g) = (r.u32()?, r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let params = GoppaParams::new(d, n_g, t).map_err(|e| Error::format(e.to_string()))?;
    if c_g < params.min_dimension() || c_g > n_g {
        return Err(Error::format("key dimension out of range"));
    }
    Ok((params, c_g))
}

impl PublicKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        write_header(&mut w, KIND_PUBLIC, self.params, self.c_g);
        w.bytes(&self.g_pub.to_bytes());
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let (params, c_g) = read_header(&mut r, KIND_PUBLIC)?;
        let g_pub = BitMatrix::from_bytes(c_g, params.n_g, r.take(c_g * params.n_g.div_ceil(8))?)?;
        r.finish()?;
        Ok(Self { params, c_g, g_pub })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

impl SecretKey {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        write_header(&mut w, KIND_SECRET, self.params, self.c_g);
        w.u32(self.field.modulus_poly());
        w.bytes(&self.s.to_bytes());
        for k in 0..=self.params.t {
            w.u32(self.goppa.coef(k));
        }
        for &a in &self.support {
            w.u32(a);
        }
        for &p in &self.perm {
            w.u32(p);
        }
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let (params, c_g) = read_header(&mut r, KIND_SECRET)?;
        let field = FieldSpec::binary_with_modulus(params.d, r.u32()?).map_err(|e| Error::format(e.to_string()))?;
        let s = BitMatrix::from_bytes(c_g, c_g, r.take(c_g * c_g.div_ceil(8))?)?;
        let goppa = Poly::from_coeffs((0..=params.t).map(|_| r.u32()).collect::<Result<Vec<_>>>()?);
        let support = (0..params.n_g).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        let perm = (0..params.n_g).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        if goppa.deg() != params.t as isize || !goppa.0.iter().all(|&c| field.contains(c)) {
            return Err(Error::format("Goppa polynomial malformed"));
        }
        if params.t > 0 && !is_irreducible(&goppa, &field) {
            return Err(Error::format("Goppa polynomial is not irreducible"));
        }
        let mut seen = vec![false; field.order() as usize];
        for &a in &support {
            if !field.contains(a) || std::mem::replace(&mut seen[a as usize], true) {
                return Err(Error::format("support elements invalid or repeated"));
            }
            if params.t > 0 && goppa.eval(a, &field) == 0 {
                return Err(Error::format("support contains a root of g"));
            }
        }
        let mut pseen = vec![false; params.n_g];
        for &p in &perm {
            if p as usize >= params.n_g || std::mem::replace(&mut pseen[p as usize], true) {
                return Err(Error::format("permutation invalid"));
            }
        }
        let (sk, _) = SecretKey::derive(params, field, goppa, support, perm, s)?;
        if sk.c_g != c_g {
            return Err(Error::format("secret key dimension inconsistent"));
        }
        Ok(sk)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// McEliece behind the [`BlockCipher`] interface. Decryption needs the secret key.
#[derive(Clone, Debug)]
pub struct McEliece {
    public: PublicKey,
    secret: Option<SecretKey>,
}

impl McEliece {
    pub fn new(public: PublicKey, secret: Option<SecretKey>) -> Result<Self> {
        if let Some(sk) = &secret {
            if sk.params != public.params || sk.c_g != public.c_g {
                return Err(Error::usage("public and secret key parameters differ"));
            }
        }
        Ok(Self { public, secret })
    }

    pub fn from_pair(pair: McElieceKeyPair) -> Self {
        Self { public: pair.public, secret: Some(pair.secret) }
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }
}

impl BlockCipher for McEliece {
    fn name(&self) -> &str {
        "mceliece"
    }
    fn plaintext_bits(&self) -> usize {
        self.public.c_g
    }
    fn ciphertext_bits(&self) -> usize {
        self.public.params.n_g
    }
    fn encrypt_block(&self, m: &[u8], rng: &mut dyn RngCore) -> Result<Vec<u8>> {
        self.public.encrypt(m, rng)
    }
    fn decrypt_block(&self, c: &[u8]) -> Result<Vec<u8>> {
        match &self.secret {
            Some(sk) => sk.decrypt(c),
            None => Err(Error::usage("decryption requires the secret key")),
        }
    }
}

/// Pack helper for callers that store ciphertext blocks as bytes.
pub fn block_to_bytes(bits: &[u8]) -> Vec<u8> {
    pack_bits(bits)
}

/// Inverse of [`block_to_bytes`].
pub fn block_from_bytes(bytes: &[u8], bits: usize) -> Vec<u8> {
    unpack_bits(bytes, bits)
}

/// Hamming weight of `a ⊕ b`.
pub fn distance(a: &[u8], b: &[u8]) -> usize {
    weight(&a.iter().zip(b).map(|(x, y)| x ^ y).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn f16() -> FieldSpec {
        FieldSpec::binary(4).unwrap()
    }

    #[test]
    fn poly_arithmetic() {
        let f = f16();
        let a = Poly::from_coeffs(vec![3, 0, 7, 1]);
        let b = Poly::from_coeffs(vec![5, 1]);
        let (q, r) = a.div_rem(&b, &f);
        assert_eq!(q.mul(&b, &f).add(&r), a);
        assert!(r.deg() < b.deg());
        assert_eq!(a.square(&f), a.mul(&a, &f));
        assert_eq!(Poly::from_coeffs(vec![0, 0]), Poly::zero());
        assert_eq!(Poly::monomial(3, 2).deg(), 2);
        let x = 9;
        assert_eq!(a.mul(&b, &f).eval(x, &f), f.mul(a.eval(x, &f), b.eval(x, &f)));
    }

    #[test]
    fn irreducibility_against_root_and_factor_oracle() {
        let f = FieldSpec::binary(3).unwrap();
        // Degree 2 and 3 polynomials are irreducible iff they have no root.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let deg = rng.gen_range(2..=3);
            let mut c: Vec<u32> = (0..deg).map(|_| rng.gen_range(0..8)).collect();
            c.push(1);
            let p = Poly::from_coeffs(c);
            let has_root = (0..8).any(|a| p.eval(a, &f) == 0);
            assert_eq!(is_irreducible(&p, &f), !has_root, "{p:?}");
        }
        // Product of two irreducible quadratics has no root but is reducible.
        let mut quads = (0..64u32).map(|i| Poly::from_coeffs(vec![i % 8, i / 8, 1])).filter(|p| is_irreducible(p, &f));
        let (p1, p2) = (quads.next().unwrap(), quads.next().unwrap());
        let prod = p1.mul(&p2, &f);
        assert!((0..8).all(|a| prod.eval(a, &f) != 0));
        assert!(!is_irreducible(&prod, &f));
    }

    #[test]
    fn inverse_and_sqrt_mod_g() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 32, 2).unwrap(), 1).unwrap();
        let sk = &pair.secret;
        let f = &sk.field;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let x = Poly::from_coeffs((0..2).map(|_| rng.gen_range(0..32)).collect());
            if x.is_zero() {
                continue;
            }
            let inv = x.inv_mod(&sk.goppa, f).unwrap();
            assert_eq!(x.mul(&inv, f).rem(&sk.goppa, f), Poly(vec![1]));
            let s = sk.sqrt_mod(&x);
            assert_eq!(s.square(f).rem(&sk.goppa, f), x);
        }
    }

    #[test]
    fn parity_columns_are_inverses() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 32, 3).unwrap(), 4).unwrap();
        let sk = &pair.secret;
        for (i, col) in sk.columns.iter().enumerate() {
            let lin = Poly::from_coeffs(vec![sk.support[i], 1]);
            assert_eq!(col.mul(&lin, &sk.field).rem(&sk.goppa, &sk.field), Poly(vec![1]));
        }
    }

    #[test]
    fn keygen_small_dimensions_and_determinism() {
        let p = GoppaParams::new(5, 32, 2).unwrap();
        let a = McElieceKeyPair::generate(p, 9).unwrap();
        let b = McElieceKeyPair::generate(p, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.public.to_bytes(), b.public.to_bytes());
        assert!(a.public.c_g() >= 22);
        assert_eq!(a.public.matrix().rows(), a.public.c_g());
        assert_eq!(a.public.matrix().cols(), 32);
        assert_eq!(a.public.matrix().rank(), a.public.c_g());
        let c = McElieceKeyPair::generate(p, 10).unwrap();
        assert_ne!(a.public.to_bytes(), c.public.to_bytes());
    }

    #[test]
    fn public_key_is_scrambled_permuted_code() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 32, 2).unwrap(), 2).unwrap();
        let sk = &pair.secret;
        // Every row of G_pub, un-permuted, has zero syndrome.
        for r in 0..pair.public.c_g() {
            let row = pair.public.matrix().row_bits(r);
            let mut y = vec![0u8; 32];
            for (j, &p) in sk.perm.iter().enumerate() {
                y[p as usize] = row[j];
            }
            assert!(sk.syndrome(&y).is_zero());
        }
    }

    #[test]
    fn params_validation() {
        assert!(GoppaParams::new(4, 16, 1).is_err());
        assert!(GoppaParams::new(5, 16, 1).is_ok());
        assert!(GoppaParams::new(4, 16, 2).is_ok());
        assert!(GoppaParams::new(4, 16, 4).is_err());
        assert!(GoppaParams::new(1, 2, 0).is_err());
        assert_eq!(GoppaParams::classic_1024().min_dimension(), 524);
    }

    #[test]
    fn t_zero_is_linear() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(4, 16, 0).unwrap(), 1).unwrap();
        assert_eq!(pair.public.c_g(), 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m: Vec<u8> = (0..16).map(|i| (i % 3 == 0) as u8).collect();
        let k = pair.public.encrypt(&m, &mut rng).unwrap();
        assert_eq!(k, pair.public.matrix().vec_mul(&m).unwrap());
        assert_eq!(pair.secret.decrypt(&k).unwrap(), m);
    }

    #[test]
    fn roundtrip_32_with_exact_weight() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 32, 2).unwrap(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cg = pair.public.c_g();
        for _ in 0..1000 {
            let m: Vec<u8> = (0..cg).map(|_| rng.gen::<bool>() as u8).collect();
            let k = pair.public.encrypt(&m, &mut rng).unwrap();
            assert_eq!(distance(&k, &pair.public.matrix().vec_mul(&m).unwrap()), 2);
            assert_eq!(pair.secret.decrypt(&k).unwrap(), m);
        }
        let m = vec![1u8; cg];
        let clean = pair.public.encrypt_with_errors(&m, 0, &mut rng).unwrap();
        assert_eq!(pair.secret.decrypt(&clean).unwrap(), m);
    }

    #[test]
    fn exhaustive_single_error_n16() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 16, 1).unwrap(), 3).unwrap();
        let cg = pair.public.c_g();
        assert!(cg >= 11);
        for mi in 0..(1u32 << cg) {
            let m: Vec<u8> = (0..cg).map(|i| ((mi >> i) & 1) as u8).collect();
            let c = pair.public.matrix().vec_mul(&m).unwrap();
            assert_eq!(pair.secret.decrypt(&c).unwrap(), m);
            for e in 0..16 {
                let mut k = c.clone();
                k[e] ^= 1;
                assert_eq!(pair.secret.decrypt(&k).unwrap(), m, "m={mi} e={e}");
            }
        }
    }

    #[test]
    fn too_many_errors_detected_at_moderate_size() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(8, 256, 8).unwrap(), 12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cg = pair.public.c_g();
        for _ in 0..100 {
            let m: Vec<u8> = (0..cg).map(|_| rng.gen::<bool>() as u8).collect();
            let k = pair.public.encrypt_with_errors(&m, 9, &mut rng).unwrap();
            assert!(matches!(pair.secret.decrypt(&k), Err(Error::Crypto(_))));
            let ok = pair.public.encrypt(&m, &mut rng).unwrap();
            assert_eq!(pair.secret.decrypt(&ok).unwrap(), m);
        }
    }

    #[test]
    fn key_files_roundtrip() {
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 32, 2).unwrap(), 21).unwrap();
        let pb = pair.public.to_bytes();
        assert_eq!(&pb[..7], b"NUHMCE1");
        assert_eq!(PublicKey::from_bytes(&pb).unwrap(), pair.public);
        let sb = pair.secret.to_bytes();
        let sk = SecretKey::from_bytes(&sb).unwrap();
        assert_eq!(sk, pair.secret);
        assert_eq!(sk.to_bytes(), sb);
        assert!(matches!(SecretKey::from_bytes(&pb), Err(Error::Format(_))));
        assert!(PublicKey::from_bytes(&pb[..pb.len() - 1]).is_err());
        let mut bad = sb.clone();
        let n = bad.len();
        bad[n - 1] = bad[n - 5];
        bad[n - 4..].copy_from_slice(&sb[n - 8..n - 4]);
        assert!(SecretKey::from_bytes(&bad).is_err());
    }

    #[test]
    fn wrong_key_fails() {
        let p = GoppaParams::new(6, 64, 4).unwrap();
        let a = McElieceKeyPair::generate(p, 1).unwrap();
        let b = McElieceKeyPair::generate(p, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cg = a.public.c_g().min(b.public.c_g());
        let mut failures = 0;
        for _ in 0..50 {
            let m: Vec<u8> = (0..a.public.c_g()).map(|_| rng.gen::<bool>() as u8).collect();
            let k = a.public.encrypt(&m, &mut rng).unwrap();
            match b.secret.decrypt(&k) {
                Err(Error::Crypto(_)) => failures += 1,
                Ok(out) => assert_ne!(out[..cg], m[..cg]),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(failures >= 40, "{failures}");
    }

    #[test]
    fn cipher_interface() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let null = NullCipher::new(8);
        assert_eq!(null.r_bits(), 0);
        let m = vec![1, 0, 1, 1, 0, 0, 1, 0];
        assert_eq!(null.encrypt_block(&m, &mut rng).unwrap(), m);
        assert!(null.encrypt_block(&m[..3], &mut rng).is_err());
        let toy = ToyXorCipher::new(8, 4);
        let c = toy.encrypt_block(&m, &mut rng).unwrap();
        assert_eq!(toy.decrypt_block(&c).unwrap(), m);
        let pair = McElieceKeyPair::generate(GoppaParams::new(5, 32, 2).unwrap(), 1).unwrap();
        let cg = pair.public.c_g();
        let mc = McEliece::from_pair(pair.clone());
        assert_eq!((mc.plaintext_bits(), mc.ciphertext_bits()), (cg, 32));
        let public_only = McEliece::new(pair.public, None).unwrap();
        let k = public_only.encrypt_block(&vec![0; cg], &mut rng).unwrap();
        assert!(matches!(public_only.decrypt_block(&k), Err(Error::Usage(_))));
        assert_eq!(mc.decrypt_block(&k).unwrap(), vec![0; cg]);
        assert_eq!(block_from_bytes(&block_to_bytes(&k), 32), k);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn toy_cipher_roundtrip(bits in proptest::collection::vec(0u8..2, 1..64), seed in any::<u64>()) {
            let toy = ToyXorCipher::new(bits.len(), seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = toy.encrypt_block(&bits, &mut rng).unwrap();
            prop_assert_eq!(toy.decrypt_block(&c).unwrap(), bits);
        }

        #[test]
        fn mceliece_roundtrip_any_error_weight_up_to_t(seed in any::<u64>(), errs in 0usize..=3) {
            let pair = McElieceKeyPair::generate(GoppaParams::new(6, 64, 3).unwrap(), seed % 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m: Vec<u8> = (0..pair.public.c_g()).map(|_| rng.gen::<bool>() as u8).collect();
            let k = pair.public.encrypt_with_errors(&m, errs, &mut rng).unwrap();
            prop_assert_eq!(pair.secret.decrypt(&k).unwrap(), m);
        }
    }
}
