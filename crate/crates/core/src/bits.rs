//! Packed binary vectors and matrices.
//!
//! Bit vectors at API boundaries are `&[u8]` slices holding one bit (0 or 1)
//! per byte. [`BitMatrix`] stores rows packed into `u64` words, least
//! significant bit first, for the linear algebra in the cipher and for compact
//! storage of message, codeword and seed matrices.

use crate::error::{Error, Result};

/// Dense row-major binary matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows.min(16) {
            let s: String = (0..self.cols.min(96)).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from rows of 0/1 bytes; all rows must share a length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::usage("ragged bit rows"));
            }
            m.set_row_bits(r, row)?;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    /// `u64` words per packed row.
    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "bit ({r},{c}) outside {}x{}", self.rows, self.cols);
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols, "bit ({r},{c}) outside {}x{}", self.rows, self.cols);
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words..(r + 1) * self.words]
    }

    /// Row `r` as 0/1 bytes.
    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    pub fn set_row_bits(&mut self, r: usize, bits: &[u8]) -> Result<()> {
        if bits.len() != self.cols {
            return Err(Error::usage(format!("row length {} != {}", bits.len(), self.cols)));
        }
        let words = self.words;
        let row = &mut self.data[r * words..(r + 1) * words];
        row.fill(0);
        for (c, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                row[c / 64] |= 1 << (c % 64);
            }
        }
        Ok(())
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        let w = self.words;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * w);
            (&lo[src * w..(src + 1) * w], &mut hi[..w])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * w);
            (&hi[..w], &mut lo[dst * w..(dst + 1) * w])
        };
        for (d, s) in b.iter_mut().zip(a) {
            *d ^= s;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.words {
            self.data.swap(a * self.words + k, b * self.words + k);
        }
    }

    /// Row vector times matrix: `v · self` where `v` has `rows` bits.
    pub fn vec_mul(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.rows {
            return Err(Error::usage(format!("vector length {} != {} rows", v.len(), self.rows)));
        }
        let mut acc = vec![0u64; self.words];
        for (r, &b) in v.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(r)) {
                    *a ^= w;
                }
            }
        }
        Ok(unpack_words(&acc, self.cols))
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows {
            return Err(Error::usage("bit matrix dimension mismatch"));
        }
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let mut acc = vec![0u64; other.words];
            for k in 0..self.cols {
                if self.get(r, k) {
                    for (a, w) in acc.iter_mut().zip(other.row_words(k)) {
                        *a ^= w;
                    }
                }
            }
            out.row_words_mut(r).copy_from_slice(&acc);
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Keep only the listed columns, in the listed order.
    pub fn select_cols(&self, idx: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (k, &c) in idx.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, k, true);
                }
            }
        }
        out
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_reduce().len()
    }

    /// In-place Gauss-Jordan elimination; returns the pivot column of each
    /// leading row. Pivot rows are the first rows with a one in each column.
    pub fn row_reduce(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(p, r);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Inverse of a square matrix over GF(2).
    pub fn inverse(&self) -> Result<BitMatrix> {
        if self.rows != self.cols {
            return Err(Error::usage("inverse of non-square bit matrix"));
        }
        let n = self.rows;
        let mut aug = BitMatrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            aug.set(r, n + r, true);
        }
        let piv = aug.row_reduce();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return Err(Error::construction("bit matrix is singular"));
        }
        let idx: Vec<usize> = (n..2 * n).collect();
        Ok(aug.select_cols(&idx))
    }

    /// Packed row-major bytes (each row padded to whole bytes), LSB-first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows * self.cols.div_ceil(8));
        for r in 0..self.rows {
            out.extend(pack_bits(&self.row_bits(r)));
        }
        out
    }

    pub fn from_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<BitMatrix> {
        let per = cols.div_ceil(8);
        if bytes.len() != rows * per {
            return Err(Error::format(format!(
                "bit matrix {rows}x{cols} needs {} bytes, got {}",
                rows * per,
                bytes.len()
            )));
        }
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            let chunk = &bytes[r * per..(r + 1) * per];
            let bits = unpack_bits(chunk, cols);
            if pack_bits(&bits) != chunk {
                return Err(Error::format("nonzero padding bits in packed row"));
            }
            m.set_row_bits(r, &bits)?;
        }
        Ok(m)
    }
}

/// Pack 0/1 bytes into bytes, LSB-first within each byte.
pub fn pack_bits(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (i % 8);
    }
    out
}

/// Inverse of [`pack_bits`], returning exactly `len` bits.
pub fn unpack_bits(bytes: &[u8], len: usize) -> Vec<u8> {
    (0..len).map(|i| (bytes[i / 8] >> (i % 8)) & 1).collect()
}

/// Expand packed `u64` words into `len` 0/1 bytes.
pub fn unpack_words(words: &[u64], len: usize) -> Vec<u8> {
    (0..len).map(|i| ((words[i / 64] >> (i % 64)) & 1) as u8).collect()
}

/// Pack 0/1 bytes into `u64` words, LSB-first.
pub fn pack_words(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 64] |= ((b & 1) as u64) << (i % 64);
    }
    out
}

/// Hamming weight of a 0/1 byte slice.
pub fn weight(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b != 0).count()
}

/// Element-wise XOR of two equal-length bit vectors.
pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}
