//! Finite-field arithmetic over GF(2^μ) and GF(p), plus dense matrix algebra.
//!
//! Binary-extension fields use a polynomial basis with a fixed table of
//! low-weight irreducible moduli and log/antilog tables for multiplication.
//! Prime fields use plain modular integer arithmetic. Elements are carried as
//! raw `u32` values in the hot paths; [`FieldElement`] wraps a value together
//! with its field for the checked public API.
//!
//! Nothing here is constant-time.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Largest supported extension degree for GF(2^μ).
pub const MAX_MU: u32 = 20;

/// Largest supported prime modulus for GF(p).
pub const MAX_PRIME: u32 = 1 << 30;

/// Default low-weight irreducible modulus for GF(2^μ), including the leading term.
pub fn default_modulus(mu: u32) -> Option<u32> {
    let poly = match mu {
        1 => 0b11,
        2 => 0b111,
        3 => 0b1011,
        4 => 0b1_0011,
        5 => 0b10_0101,
        6 => 0b100_0011,
        7 => 0b1000_0011,
        8 => 0x11B,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1009,
        13 => 0x201B,
        14 => 0x4021,
        15 => 0x8003,
        16 => 0x1002B,
        17 => 0x20009,
        18 => 0x40081,
        19 => 0x80027,
        20 => 0x100009,
        _ => return None,
    };
    Some(poly)
}

/// Degree of a GF(2) polynomial stored as a bit vector (`-1` for zero).
fn poly_degree(p: u64) -> i32 {
    63 - p.leading_zeros() as i32
}

/// Remainder of `a` modulo `m` over GF(2).
fn poly_rem(mut a: u64, m: u64) -> u64 {
    let dm = poly_degree(m);
    while poly_degree(a) >= dm {
        a ^= m << (poly_degree(a) - dm);
    }
    a
}

/// Irreducibility over GF(2) by trial division against every polynomial of
/// degree 1..=deg/2.
pub fn is_irreducible_gf2(poly: u64) -> bool {
    let deg = poly_degree(poly);
    if deg < 1 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=(deg / 2) {
        for low in 0..(1u64 << d) {
            let divisor = (1u64 << d) | low;
            if poly_rem(poly, divisor) == 0 {
                return false;
            }
        }
    }
    true
}

/// Deterministic primality check by trial division.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    if p % 2 == 0 {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p as u64 {
        if p as u64 % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Kind of finite field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FieldKind {
    BinaryExtension,
    Prime,
}

#[derive(Debug)]
struct FieldInner {
    kind: FieldKind,
    mu: u32,
    modulus_poly: u32,
    p: u32,
    order: u32,
    // Antilog table of length 2(q-1) so that exp[log a + log b] needs no reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
}

/// Arithmetic context for GF(2^μ) or GF(p). Cloning is cheap.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<FieldInner>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner.kind {
            FieldKind::BinaryExtension => write!(f, "GF(2^{}; 0x{:x})", self.inner.mu, self.inner.modulus_poly),
            FieldKind::Prime => write!(f, "GF({})", self.inner.p),
        }
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.kind == other.inner.kind
                && self.inner.mu == other.inner.mu
                && self.inner.modulus_poly == other.inner.modulus_poly
                && self.inner.p == other.inner.p)
    }
}

impl Eq for FieldSpec {}

fn clmul_mod(a: u32, b: u32, modulus: u32, mu: u32) -> u32 {
    let mut acc: u64 = 0;
    let mut a = a as u64;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    let m = modulus as u64;
    let mut deg = poly_degree(acc);
    while deg >= mu as i32 {
        acc ^= m << (deg - mu as i32);
        deg = poly_degree(acc);
    }
    acc as u32
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl FieldSpec {
    /// GF(2^μ) with the default modulus from [`default_modulus`].
    pub fn binary(mu: u32) -> Result<Self> {
        let poly = default_modulus(mu).ok_or_else(|| Error::usage(format!("no default modulus for mu={mu}")))?;
        Self::binary_with_modulus(mu, poly)
    }

    /// GF(2^μ) with an explicit modulus (bit vector including the x^μ term).
    pub fn binary_with_modulus(mu: u32, modulus_poly: u32) -> Result<Self> {
        if mu == 0 || mu > MAX_MU {
            return Err(Error::usage(format!("mu={mu} outside 1..={MAX_MU}")));
        }
        if poly_degree(modulus_poly as u64) != mu as i32 {
            return Err(Error::construction(format!("modulus 0x{modulus_poly:x} does not have degree {mu}")));
        }
        if !is_irreducible_gf2(modulus_poly as u64) {
            return Err(Error::construction(format!("modulus 0x{modulus_poly:x} is reducible over GF(2)")));
        }
        let order = 1u32 << mu;
        let group = order - 1;
        let factors = prime_factors(group);
        let pow = |mut base: u32, mut e: u32| {
            let mut r = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    r = clmul_mod(r, base, modulus_poly, mu);
                }
                base = clmul_mod(base, base, modulus_poly, mu);
                e >>= 1;
            }
            r
        };
        let generator = if group == 1 {
            1
        } else {
            (2..order)
                .find(|&g| factors.iter().all(|&f| pow(g, group / f) != 1))
                .ok_or_else(|| Error::construction("no primitive element found"))?
        };
        let mut exp = vec![0u32; 2 * group as usize];
        let mut log = vec![0u32; order as usize];
        let mut x = 1u32;
        for i in 0..group {
            exp[i as usize] = x;
            log[x as usize] = i;
            x = clmul_mod(x, generator, modulus_poly, mu);
        }
        for i in group..2 * group {
            exp[i as usize] = exp[(i - group) as usize];
        }
        Ok(Self {
            inner: Arc::new(FieldInner { kind: FieldKind::BinaryExtension, mu, modulus_poly, p: 2, order, exp, log }),
        })
    }

    /// Prime field GF(p).
    pub fn prime(p: u32) -> Result<Self> {
        if p > MAX_PRIME {
            return Err(Error::usage(format!("prime {p} exceeds {MAX_PRIME}")));
        }
        if !is_prime(p) {
            return Err(Error::construction(format!("{p} is not prime")));
        }
        Ok(Self {
            inner: Arc::new(FieldInner {
                kind: FieldKind::Prime,
                mu: 0,
                modulus_poly: 0,
                p,
                order: p,
                exp: Vec::new(),
                log: Vec::new(),
            }),
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.inner.kind
    }

    /// Extension degree μ (0 for prime fields).
    pub fn mu(&self) -> u32 {
        self.inner.mu
    }

    /// Modulus polynomial (0 for prime fields).
    pub fn modulus_poly(&self) -> u32 {
        self.inner.modulus_poly
    }

    /// Characteristic.
    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    /// Number of field elements q.
    pub fn order(&self) -> u32 {
        self.inner.order
    }

    /// Bits needed to store one element.
    pub fn symbol_bits(&self) -> u32 {
        match self.inner.kind {
            FieldKind::BinaryExtension => self.inner.mu,
            FieldKind::Prime => 32 - (self.inner.p - 1).leading_zeros(),
        }
    }

    pub fn contains(&self, a: u32) -> bool {
        a < self.inner.order
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match self.inner.kind {
            FieldKind::BinaryExtension => a ^ b,
            FieldKind::Prime => {
                let s = a as u64 + b as u64;
                (s % self.inner.p as u64) as u32
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match self.inner.kind {
            FieldKind::BinaryExtension => a,
            FieldKind::Prime => {
                if a == 0 {
                    0
                } else {
                    self.inner.p - a
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match self.inner.kind {
            FieldKind::BinaryExtension => {
                if a == 0 || b == 0 {
                    0
                } else {
                    let i = self.inner.log[a as usize] + self.inner.log[b as usize];
                    self.inner.exp[i as usize]
                }
            }
            FieldKind::Prime => ((a as u64 * b as u64) % self.inner.p as u64) as u32,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        match self.inner.kind {
            FieldKind::BinaryExtension => {
                let group = self.inner.order - 1;
                let l = self.inner.log[a as usize];
                Some(self.inner.exp[((group - l) % group) as usize])
            }
            FieldKind::Prime => Some(self.pow(a, (self.inner.p - 2) as u64)),
        }
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut r = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        r
    }

    /// Field element wrapper for the checked API.
    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if !self.contains(value) {
            return Err(Error::usage(format!("{value} is not an element of {self:?}")));
        }
        Ok(FieldElement { value, spec: self.clone() })
    }
}

/// A value tied to its field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    value: u32,
    spec: FieldSpec,
}

impl FieldElement {
    pub fn value(&self) -> u32 {
        self.value
    }
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::usage(format!("field mismatch: {:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(())
    }
    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(FieldElement { value: self.spec.add(self.value, other.value), spec: self.spec.clone() })
    }
    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        field_mul(self, other)
    }
    pub fn inv(&self) -> Option<FieldElement> {
        self.spec.inv(self.value).map(|value| FieldElement { value, spec: self.spec.clone() })
    }
}

/// Product of two elements of the same field.
pub fn field_mul(a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
    a.same_field(b)?;
    Ok(FieldElement { value: a.spec.mul(a.value, b.value), spec: a.spec.clone() })
}

/// Dense row-major matrix over a [`FieldSpec`].
#[derive(Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FieldMatrix {}x{} over {:?}", self.rows, self.cols, self.spec)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Reduced row-echelon form with the pivot column of each nonzero row.
pub struct Rref {
    pub matrix: FieldMatrix,
    pub pivots: Vec<usize>,
}

impl FieldMatrix {
    pub fn zeros(spec: &FieldSpec, rows: usize, cols: usize) -> Self {
        Self { spec: spec.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(spec: &FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Build from row-major values; every value must be a field element.
    pub fn from_vec(spec: &FieldSpec, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::usage(format!(
                "expected {} entries for {rows}x{cols}, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|&&v| !spec.contains(v)) {
            return Err(Error::usage(format!("{v} is not an element of {spec:?}")));
        }
        Ok(Self { spec: spec.clone(), rows, cols, data })
    }

    pub fn from_rows(spec: &FieldSpec, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::usage("ragged rows"));
        }
        Self::from_vec(spec, rows.len(), cols, rows.concat())
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(self.spec.contains(v));
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.spec, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// Matrix product `self · other`.
    pub fn mat_mul(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.spec != other.spec {
            return Err(Error::usage("mat_mul over different fields"));
        }
        if self.cols != other.rows {
            return Err(Error::usage(format!(
                "mat_mul dimension mismatch {}x{} · {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.spec;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d = f.add(*d, f.mul(a, b));
                }
            }
        }
        Ok(out)
    }

    /// Stack `self` on top of `other`.
    pub fn vstack(&self, other: &FieldMatrix) -> Result<FieldMatrix> {
        if self.spec != other.spec || self.cols != other.cols {
            return Err(Error::usage("vstack shape or field mismatch"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self { spec: self.spec.clone(), rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn select_rows(&self, idx: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Self { spec: self.spec.clone(), rows: idx.len(), cols: self.cols, data }
    }

    pub fn select_cols(&self, idx: &[usize]) -> FieldMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for r in 0..self.rows {
            for &c in idx {
                data.push(self.get(r, c));
            }
        }
        Self { spec: self.spec.clone(), rows: self.rows, cols: idx.len(), data }
    }

    /// Reduced row-echelon form. Pivots are chosen as the first nonzero entry
    /// scanning rows top-down in each column, columns left to right.
    pub fn rref(&self) -> Rref {
        let f = &self.spec;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c) != 0) else {
                continue;
            };
            if p != r {
                for j in 0..m.cols {
                    m.data.swap(p * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in 0..m.cols {
                let v = f.mul(m.get(r, j), inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in 0..m.cols {
                    let v = f.sub(m.get(i, j), f.mul(factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Inverse of a square matrix; singular input is reported as invalid key
    /// or code material.
    pub fn inverse(&self) -> Result<FieldMatrix> {
        if self.rows != self.cols {
            return Err(Error::usage(format!("inverse of non-square {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut aug = Self::zeros(&self.spec, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, 1);
        }
        let red = aug.rref();
        if red.pivots.len() < n || red.pivots[n - 1] != n - 1 {
            return Err(Error::construction("matrix is singular"));
        }
        let idx: Vec<usize> = (n..2 * n).collect();
        Ok(red.matrix.select_cols(&idx))
    }

    /// Basis N of the right null space: `self · Nᵀ = 0` with `cols − rows` rows.
    pub fn null_space_basis(&self) -> Result<FieldMatrix> {
        let red = self.rref();
        if red.pivots.len() != self.rows {
            return Err(Error::construction(format!(
                "null_space_basis needs full row rank, got rank {} of {} rows",
                red.pivots.len(),
                self.rows
            )));
        }
        let f = &self.spec;
        let free: Vec<usize> = (0..self.cols).filter(|c| !red.pivots.contains(c)).collect();
        let mut n = Self::zeros(f, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            n.set(k, fc, 1);
            for (i, &pc) in red.pivots.iter().enumerate() {
                n.set(k, pc, f.neg(red.matrix.get(i, fc)));
            }
        }
        Ok(n)
    }
}

impl FieldMatrix {
    /// Unit rows completing a full-row-rank matrix to a basis of F^cols: one
    /// row e_j for every non-pivot column j of the reduced echelon form.
    pub fn complement_basis(&self) -> Result<FieldMatrix> {
        let red = self.rref();
        if red.pivots.len() != self.rows {
            return Err(Error::construction("complement_basis needs full row rank"));
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !red.pivots.contains(c)).collect();
        let mut out = Self::zeros(&self.spec, free.len(), self.cols);
        for (k, &c) in free.iter().enumerate() {
            out.set(k, c, 1);
        }
        Ok(out)
    }
}

impl FieldSpec {
    /// Append `kind:u8, mu:u32, modulus:u32, p:u32`.
    pub fn write_to(&self, w: &mut crate::io::Writer) {
        w.u8(match self.kind() {
            FieldKind::BinaryExtension => 0,
            FieldKind::Prime => 1,
        });
        w.u32(self.mu());
        w.u32(self.modulus_poly());
        w.u32(self.characteristic());
    }

    pub fn read_from(r: &mut crate::io::Reader) -> Result<Self> {
        let kind = r.u8()?;
        let (mu, poly, p) = (r.u32()?, r.u32()?, r.u32()?);
        let spec = match kind {
            0 => Self::binary_with_modulus(mu, poly),
            1 => Self::prime(p),
            k => return Err(Error::format(format!("unknown field kind {k}"))),
        };
        spec.map_err(|e| Error::format(format!("invalid field spec: {e}")))
    }
}

impl FieldMatrix {
    /// Append `rows:u32, cols:u32` and the row-major entries as u32.
    pub fn write_to(&self, w: &mut crate::io::Writer) {
        w.u32(self.rows as u32);
        w.u32(self.cols as u32);
        for &v in &self.data {
            w.u32(v);
        }
    }

    pub fn read_from(spec: &FieldSpec, r: &mut crate::io::Reader) -> Result<Self> {
        let rows = r.u32()? as usize;
        let cols = r.u32()? as usize;
        if rows.saturating_mul(cols) > r.remaining() / 4 {
            return Err(Error::format("matrix larger than remaining input"));
        }
        let data = (0..rows * cols).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
        Self::from_vec(spec, rows, cols, data).map_err(|e| Error::format(e.to_string()))
    }
}

/// Free-function form of [`FieldMatrix::mat_mul`].
pub fn mat_mul(a: &FieldMatrix, b: &FieldMatrix) -> Result<FieldMatrix> {
    a.mat_mul(b)
}

/// Free-function form of [`FieldMatrix::inverse`].
pub fn mat_inverse(a: &FieldMatrix) -> Result<FieldMatrix> {
    a.inverse()
}

/// Free-function form of [`FieldMatrix::null_space_basis`].
pub fn null_space_basis(a: &FieldMatrix) -> Result<FieldMatrix> {
    a.null_space_basis()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Schoolbook multiplication with reduction after every shift; shares no
    // code with the table path.
    fn slow_mul(a: u32, b: u32, modulus: u32, mu: u32) -> u32 {
        let mut acc = 0u32;
        let mut a = a;
        for i in 0..mu {
            if (b >> i) & 1 == 1 {
                acc ^= a;
            }
            a <<= 1;
            if (a >> mu) & 1 == 1 {
                a ^= modulus;
            }
        }
        acc
    }

    #[test]
    fn default_moduli_are_irreducible() {
        for mu in 1..=MAX_MU {
            let p = default_modulus(mu).unwrap();
            assert!(is_irreducible_gf2(p as u64), "mu={mu}");
            assert_eq!(poly_degree(p as u64), mu as i32);
        }
    }

    #[test]
    fn reducible_modulus_rejected() {
        // x^4 + 1 = (x+1)^4
        assert!(FieldSpec::binary_with_modulus(4, 0b1_0001).is_err());
        assert!(FieldSpec::prime(12).is_err());
    }

    #[test]
    fn gf8_example_product() {
        let f = FieldSpec::binary(3).unwrap();
        assert_eq!(f.mul(0b011, 0b011), 0b101);
        let a = f.element(0b011).unwrap();
        assert_eq!(field_mul(&a, &a).unwrap().value(), 0b101);
    }

    #[test]
    fn gf11_example_product() {
        let f = FieldSpec::prime(11).unwrap();
        assert_eq!(f.mul(8, 4), 10);
    }

    #[test]
    fn mismatched_fields_rejected() {
        let a = FieldSpec::binary(3).unwrap().element(3).unwrap();
        let b = FieldSpec::prime(11).unwrap().element(3).unwrap();
        assert!(matches!(field_mul(&a, &b), Err(Error::Usage(_))));
    }

    #[test]
    fn table_mul_matches_schoolbook_all_small_fields() {
        for mu in 1..=8 {
            let f = FieldSpec::binary(mu).unwrap();
            let m = default_modulus(mu).unwrap();
            for a in 0..f.order() {
                for b in 0..f.order() {
                    assert_eq!(f.mul(a, b), slow_mul(a, b, m, mu), "mu={mu} a={a} b={b}");
                }
            }
        }
    }

    fn check_axioms_exhaustive(f: &FieldSpec) {
        let q = f.order();
        for a in 0..q {
            assert_eq!(f.mul(a, 1), a);
            assert_eq!(f.add(a, 0), a);
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
            for b in 0..q {
                assert_eq!(f.mul(a, b), f.mul(b, a));
                assert_eq!(f.add(a, b), f.add(b, a));
                for c in 0..q {
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_orders() {
        for mu in 1..=4 {
            check_axioms_exhaustive(&FieldSpec::binary(mu).unwrap());
        }
        for p in [2, 3, 5, 7, 11, 13] {
            check_axioms_exhaustive(&FieldSpec::prime(p).unwrap());
        }
    }

    proptest! {
        #[test]
        fn field_axioms_sampled(mu in 5u32..=16, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let f = FieldSpec::binary(mu).unwrap();
            let (a, b, c) = (a % f.order(), b % f.order(), c % f.order());
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(a, b), slow_mul(a, b, f.modulus_poly(), mu));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }

        #[test]
        fn prime_field_axioms_sampled(a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let f = FieldSpec::prime(65521).unwrap();
            let (a, b, c) = (a % 65521, b % 65521, c % 65521);
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            if a != 0 {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    fn random_matrix(f: &FieldSpec, r: usize, c: usize, rng: &mut ChaCha8Rng) -> FieldMatrix {
        let data = (0..r * c).map(|_| rng.gen_range(0..f.order())).collect();
        FieldMatrix::from_vec(f, r, c, data).unwrap()
    }

    #[test]
    fn worked_gf11_generator_product() {
        let f = FieldSpec::prime(11).unwrap();
        let g = FieldMatrix::from_rows(&f, &[vec![3, 3, 6], vec![8, 4, 10], vec![1, 3, 6]]).unwrap();
        for m1 in 0..11 {
            for m2 in 0..11 {
                for m3 in [0, 1, 7] {
                    let m = FieldMatrix::from_vec(&f, 1, 3, vec![m1, m2, m3]).unwrap();
                    let x = m.mat_mul(&g).unwrap();
                    assert_eq!(x.get(0, 0), (3 * m1 + 8 * m2 + m3) % 11);
                    assert_eq!(x.get(0, 1), (3 * m1 + 4 * m2 + 3 * m3) % 11);
                    assert_eq!(x.get(0, 2), (6 * m1 + 10 * m2 + 6 * m3) % 11);
                }
            }
        }
    }

    #[test]
    fn identity_and_zero_products() {
        let f = FieldSpec::binary(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_matrix(&f, 3, 5, &mut rng);
        assert_eq!(FieldMatrix::identity(&f, 3).mat_mul(&b).unwrap(), b);
        assert!(FieldMatrix::zeros(&f, 2, 3).mat_mul(&b).unwrap().is_zero());
        assert!(b.mat_mul(&b).is_err());
    }

    #[test]
    fn inverse_examples() {
        let f2 = FieldSpec::binary(1).unwrap();
        let a = FieldMatrix::from_rows(&f2, &[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(mat_inverse(&a).unwrap(), a);
        let i = FieldMatrix::identity(&f2, 4);
        assert_eq!(mat_inverse(&i).unwrap(), i);
        let singular = FieldMatrix::from_rows(&f2, &[vec![1, 1], vec![0, 0]]).unwrap();
        assert!(matches!(mat_inverse(&singular), Err(Error::Construction(_))));
    }

    #[test]
    fn random_inverses_up_to_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [
            FieldSpec::binary(1).unwrap(),
            FieldSpec::binary(3).unwrap(),
            FieldSpec::binary(8).unwrap(),
            FieldSpec::prime(11).unwrap(),
        ] {
            for n in 1..=8 {
                let mut done = 0;
                while done < 5 {
                    let a = random_matrix(&spec, n, n, &mut rng);
                    if a.rank() < n {
                        assert!(a.inverse().is_err());
                        continue;
                    }
                    let inv = a.inverse().unwrap();
                    assert_eq!(a.mat_mul(&inv).unwrap(), FieldMatrix::identity(&spec, n));
                    assert_eq!(inv.mat_mul(&a).unwrap(), FieldMatrix::identity(&spec, n));
                    done += 1;
                }
            }
        }
    }

    #[test]
    fn null_space_examples() {
        let f2 = FieldSpec::binary(1).unwrap();
        let a = FieldMatrix::from_rows(&f2, &[vec![1, 0, 0]]).unwrap();
        let n = null_space_basis(&a).unwrap();
        assert_eq!(n.rows(), 2);
        assert!(a.mat_mul(&n.transpose()).unwrap().is_zero());

        let f8 = FieldSpec::binary(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = loop {
            let a = random_matrix(&f8, 2, 4, &mut rng);
            if a.rank() == 2 {
                break a;
            }
        };
        let n = null_space_basis(&a).unwrap();
        assert_eq!(n.rows(), 2);
        assert_eq!(n.rank(), 2);
        assert!(a.mat_mul(&n.transpose()).unwrap().is_zero());
        assert_eq!(n.vstack(&a).unwrap().rank(), 4);

        let sq = FieldMatrix::identity(&f8, 3);
        assert_eq!(null_space_basis(&sq).unwrap().rows(), 0);

        let deficient = FieldMatrix::from_rows(&f8, &[vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        assert!(null_space_basis(&deficient).is_err());
    }

    proptest! {
        #[test]
        fn null_space_property(seed in any::<u64>(), r in 1usize..5, extra in 0usize..4, mu in 1u32..6) {
            let f = FieldSpec::binary(mu).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&f, r, r + extra, &mut rng);
            prop_assume!(a.rank() == r);
            let n = a.null_space_basis().unwrap();
            prop_assert_eq!(n.rows(), extra);
            prop_assert!(a.mat_mul(&n.transpose()).unwrap().is_zero());
            prop_assert_eq!(n.rank(), extra);
            let comp = a.complement_basis().unwrap();
            prop_assert_eq!(comp.rows(), extra);
            prop_assert_eq!(a.vstack(&comp).unwrap().rank(), r + extra);
        }

        #[test]
        fn null_space_meets_row_space_only_when_self_orthogonal(seed in any::<u64>()) {
            // Over a finite field the dual can intersect the row space; stacking
            // is full rank exactly when no nonzero row-space vector is self-orthogonal
            // to all rows. Check the dimension identity instead.
            let f = FieldSpec::binary(1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&f, 2, 4, &mut rng);
            prop_assume!(a.rank() == 2);
            let n = a.null_space_basis().unwrap();
            let stacked = n.vstack(&a).unwrap().rank();
            let meet = a.vstack(&n).unwrap();
            prop_assert_eq!(stacked, meet.rank());
            prop_assert!((2..=4).contains(&stacked));
        }
    }
}
