//! Individually secure channel codes that mix ℓ messages across ℓ links.
//!
//! [`LinearISCode`] is a coset code: with `G_IS = [G*; G]` the column
//! `m = (m_s, m_w)` is sent as `x = m·G_IS = m_s·G* + m_w·G`. The `w` trailing
//! messages play the role of the key of a wiretap coset code, so any `w`
//! observed symbols carry no information on the `k_s` leading ones whenever
//! every `w×w` minor of `G` is nonsingular.
//!
//! [`NonlinearISCode`] is a random-binning code over bit columns: the first
//! `k_s` bits pick a bin, the remaining `k_w` bits an offset within it.

use crate::error::{Error, Result};
use crate::gf::{FieldKind, FieldMatrix, FieldSpec};
use crate::io::{Reader, Writer};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

const CODE_MAGIC: &[u8; 8] = b"NUHCODE1";

/// Rejection-sampling budget for random generator components.
pub const MAX_BUILD_ATTEMPTS: usize = 20_000;

/// Largest ℓ accepted by [`NonlinearISCode::build`].
pub const MAX_NONLINEAR_ELL: usize = 24;

/// Reason a received column could not be decoded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeError {
    /// The word occurs in this many codebook cells.
    Ambiguous(usize),
    /// The word is not a codeword.
    Absent,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::Ambiguous(k) => write!(f, "codeword appears in {k} cells"),
            DecodeError::Absent => write!(f, "word is not in the codebook"),
        }
    }
}

/// How the `w×ℓ` generator `G` of a linear code is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearConstruction {
    /// Gabidulin rows `g_j^{2^i}` over a normal basis; needs GF(2^μ), μ ≥ ℓ.
    Gabidulin,
    /// Rejection-sampled generator with every `w×w` minor nonsingular.
    RandomMds,
    /// Caller-supplied `G_IS`.
    Explicit,
}

/// Options for [`LinearISCode::build_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LinearOptions {
    /// `None` picks Gabidulin when possible and random MDS otherwise.
    pub construction: Option<LinearConstruction>,
    /// Also require every `w×w` minor of the whole `G_IS` to be nonsingular,
    /// which secures every size-`k_s` subset of messages, not only the first.
    pub all_subsets_secure: bool,
}

/// Linear coset code over a finite field.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearISCode {
    field: FieldSpec,
    ell: usize,
    k_s: usize,
    rng_seed: u64,
    construction: LinearConstruction,
    all_subsets_secure: bool,
    g: FieldMatrix,
    g_star: FieldMatrix,
    g_is: FieldMatrix,
    h: FieldMatrix,
    g_tilde: FieldMatrix,
}

/// True when every `k×k` submatrix on `rows` × (any k columns) is nonsingular.
fn minors_nonsingular(m: &FieldMatrix, rows: &[usize], k: usize) -> bool {
    let sub = m.select_rows(rows);
    (0..m.cols()).combinations(k).all(|cols| sub.select_cols(&cols).rank() == k)
}

/// True when every `k×k` minor of `m` is nonsingular.
pub fn all_minors_nonsingular(m: &FieldMatrix, k: usize) -> bool {
    (0..m.rows()).combinations(k).all(|rows| minors_nonsingular(m, &rows, k))
}

// GF(2)-rank of field elements viewed as bit vectors in the polynomial basis.
fn gf2_rank(mut vecs: Vec<u32>) -> usize {
    let mut rank = 0;
    for bit in (0..32).rev() {
        let Some(p) = vecs.iter().position(|&v| (v >> bit) & 1 == 1) else { continue };
        let pivot = vecs.swap_remove(p);
        for v in vecs.iter_mut() {
            if (*v >> bit) & 1 == 1 {
                *v ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Smallest element of GF(2^μ) whose conjugates `α^{2^i}` form a basis.
pub fn normal_basis_generator(field: &FieldSpec) -> Result<u32> {
    if field.kind() != FieldKind::BinaryExtension {
        return Err(Error::usage("normal basis requires a binary extension field"));
    }
    let mu = field.mu();
    (1..field.order())
        .find(|&a| {
            let conj: Vec<u32> = (0..mu).map(|i| field.pow(a, 1u64 << i)).collect();
            gf2_rank(conj) == mu as usize
        })
        .ok_or_else(|| Error::construction("no normal basis element found"))
}

/// `w×ℓ` Gabidulin generator with entries `g_j^{2^i}`, `g_j = α^{2^j}`.
pub fn gabidulin_generator(field: &FieldSpec, ell: usize, w: usize) -> Result<FieldMatrix> {
    if field.kind() != FieldKind::BinaryExtension || (field.mu() as usize) < ell {
        return Err(Error::construction(format!("Gabidulin code needs GF(2^mu) with mu >= ell={ell}")));
    }
    let alpha = normal_basis_generator(field)?;
    let mut g = FieldMatrix::zeros(field, w, ell);
    for i in 0..w {
        for j in 0..ell {
            // (α^{2^j})^{2^i} = α^{2^{i+j}}; the exponent is reduced mod 2^μ - 1 inside pow.
            let mut v = alpha;
            for _ in 0..(i + j) {
                v = field.mul(v, v);
            }
            g.set(i, j, v);
        }
    }
    Ok(g)
}

fn random_matrix(field: &FieldSpec, rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> FieldMatrix {
    let q = field.order();
    let data = (0..rows * cols).map(|_| rng.gen_range(0..q)).collect();
    FieldMatrix::from_vec(field, rows, cols, data).expect("entries in range")
}

impl LinearISCode {
    /// Build with default options.
    pub fn build(field: &FieldSpec, ell: usize, k_s: usize, rng_seed: u64) -> Result<Self> {
        Self::build_with(field, ell, k_s, rng_seed, LinearOptions::default())
    }

    /// Build `G` by the requested construction and sample `G*` until `G_IS`
    /// is invertible (and, optionally, all its `w×w` minors nonsingular).
    pub fn build_with(field: &FieldSpec, ell: usize, k_s: usize, rng_seed: u64, opts: LinearOptions) -> Result<Self> {
        if ell == 0 || k_s >= ell {
            return Err(Error::usage(format!("need 0 <= k_s < ell, got k_s={k_s}, ell={ell}")));
        }
        let w = ell - k_s;
        let binary_ok = field.kind() == FieldKind::BinaryExtension && field.mu() as usize >= ell;
        let construction = match opts.construction {
            None if binary_ok => LinearConstruction::Gabidulin,
            None => LinearConstruction::RandomMds,
            Some(LinearConstruction::Explicit) => {
                return Err(Error::usage("use LinearISCode::from_g_is for explicit generators"))
            }
            Some(c) => c,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let g = match construction {
            LinearConstruction::Gabidulin => gabidulin_generator(field, ell, w)?,
            _ => {
                let all_rows: Vec<usize> = (0..w).collect();
                let mut found = None;
                for _ in 0..MAX_BUILD_ATTEMPTS {
                    let cand = random_matrix(field, w, ell, &mut rng);
                    if minors_nonsingular(&cand, &all_rows, w) {
                        found = Some(cand);
                        break;
                    }
                }
                found.ok_or_else(|| {
                    Error::construction(format!("no MDS generator found for ell={ell}, w={w} over {field:?}"))
                })?
            }
        };
        for _ in 0..MAX_BUILD_ATTEMPTS {
            let g_star = random_matrix(field, k_s, ell, &mut rng);
            let g_is = g_star.vstack(&g)?;
            if g_is.rank() < ell {
                continue;
            }
            if opts.all_subsets_secure && !all_minors_nonsingular(&g_is, w) {
                continue;
            }
            let mut code = Self::assemble(g_is, k_s, rng_seed, construction)?;
            code.all_subsets_secure = opts.all_subsets_secure;
            return Ok(code);
        }
        Err(Error::construction(format!(
            "no admissible G* after {MAX_BUILD_ATTEMPTS} attempts (ell={ell}, k_s={k_s}, all_subsets={})",
            opts.all_subsets_secure
        )))
    }

    /// Code from an explicit invertible `G_IS` whose first `k_s` rows are `G*`.
    pub fn from_g_is(g_is: FieldMatrix, k_s: usize) -> Result<Self> {
        if g_is.rows() != g_is.cols() || k_s >= g_is.rows() {
            return Err(Error::usage("G_IS must be square with k_s < ell"));
        }
        let w = g_is.rows() - k_s;
        let mut code = Self::assemble(g_is, k_s, 0, LinearConstruction::Explicit)?;
        code.all_subsets_secure = all_minors_nonsingular(&code.g_is, w);
        Ok(code)
    }

    fn assemble(g_is: FieldMatrix, k_s: usize, rng_seed: u64, construction: LinearConstruction) -> Result<Self> {
        let ell = g_is.rows();
        let inv_t = g_is.transpose().inverse()?;
        let top: Vec<usize> = (0..k_s).collect();
        let bottom: Vec<usize> = (k_s..ell).collect();
        Ok(Self {
            field: g_is.spec().clone(),
            ell,
            k_s,
            rng_seed,
            construction,
            all_subsets_secure: false,
            g_star: g_is.select_rows(&top),
            g: g_is.select_rows(&bottom),
            h: inv_t.select_rows(&top),
            g_tilde: inv_t.select_rows(&bottom),
            g_is,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }
    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn k_s(&self) -> usize {
        self.k_s
    }
    pub fn w(&self) -> usize {
        self.ell - self.k_s
    }
    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
    pub fn construction(&self) -> LinearConstruction {
        self.construction
    }
    pub fn all_subsets_secure(&self) -> bool {
        self.all_subsets_secure
    }
    /// `w×ℓ` generator of the masking part.
    pub fn g(&self) -> &FieldMatrix {
        &self.g
    }
    /// `k_s×ℓ` coset-leader rows.
    pub fn g_star(&self) -> &FieldMatrix {
        &self.g_star
    }
    pub fn g_is(&self) -> &FieldMatrix {
        &self.g_is
    }
    /// `k_s×ℓ`, recovers the protected messages: `H·Gᵀ = 0`, `H·G*ᵀ = I`.
    pub fn h(&self) -> &FieldMatrix {
        &self.h
    }
    /// `w×ℓ`, recovers the masking messages: `G̃·G*ᵀ = 0`, `G̃·Gᵀ = I`.
    pub fn g_tilde(&self) -> &FieldMatrix {
        &self.g_tilde
    }

    /// `X = G_ISᵀ·M`, i.e. `Xᵀ = Mᵀ·G_IS`; one column per symbol position.
    pub fn encode(&self, m: &FieldMatrix) -> Result<FieldMatrix> {
        if m.rows() != self.ell || m.spec() != &self.field {
            return Err(Error::usage(format!("message matrix must have {} rows over the code field", self.ell)));
        }
        self.g_is.transpose().mat_mul(m)
    }

    /// `[H·X; G̃·X]`, which is `M` in its original row order.
    pub fn decode(&self, x: &FieldMatrix) -> Result<FieldMatrix> {
        if x.rows() != self.ell || x.spec() != &self.field {
            return Err(Error::usage(format!("codeword matrix must have {} rows over the code field", self.ell)));
        }
        self.h.vstack(&self.g_tilde)?.mat_mul(x)
    }

    /// Encode a single column `m` (length ℓ).
    pub fn encode_column(&self, m: &[u32]) -> Result<Vec<u32>> {
        if m.len() != self.ell {
            return Err(Error::usage("column length differs from ell"));
        }
        let f = &self.field;
        Ok((0..self.ell)
            .map(|c| (0..self.ell).fold(0, |acc, r| f.add(acc, f.mul(m[r], self.g_is.get(r, c)))))
            .collect())
    }
}

/// How nonlinear codebook entries are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodebookMode {
    /// i.i.d. uniform ℓ-bit codewords; duplicates are possible.
    Independent,
    /// A uniformly random bijection onto `{0,1}^ℓ`; duplicates are impossible.
    Distinct,
}

/// Random-binning code with `2^{k_s}` bins of `2^{k_w}` codewords each.
#[derive(Clone, PartialEq)]
pub struct NonlinearISCode {
    ell: usize,
    w: usize,
    ell_eps: usize,
    k_s: usize,
    rng_seed: u64,
    mode: CodebookMode,
    // cell index (bin << k_w | offset) -> codeword
    table: Vec<u32>,
    // codeword -> number of cells holding it
    counts: Vec<u32>,
    // codeword -> some cell holding it
    cell_of: Vec<u32>,
}

impl fmt::Debug for NonlinearISCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearISCode")
            .field("ell", &self.ell)
            .field("w", &self.w)
            .field("ell_eps", &self.ell_eps)
            .field("k_s", &self.k_s)
            .field("rng_seed", &self.rng_seed)
            .field("mode", &self.mode)
            .field("duplicated_words", &self.duplicated_words())
            .finish()
    }
}

/// Bits to integer, first bit most significant.
fn bits_to_index(bits: &[u8]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | (b & 1) as u32)
}

fn index_to_bits(v: u32, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((v >> (len - 1 - i)) & 1) as u8).collect()
}

impl NonlinearISCode {
    /// Build with `k_s = ℓ − w − ℓε`.
    pub fn build(ell: usize, w: usize, ell_eps: usize, rng_seed: u64, mode: CodebookMode) -> Result<Self> {
        if ell == 0 || ell > MAX_NONLINEAR_ELL {
            return Err(Error::usage(format!("ell={ell} outside 1..={MAX_NONLINEAR_ELL}")));
        }
        let k_s = ell as isize - w as isize - ell_eps as isize;
        if k_s < 1 {
            return Err(Error::usage(format!("k_s = ell - w - ell_eps = {k_s} < 1")));
        }
        let size = 1usize << ell;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let table: Vec<u32> = match mode {
            CodebookMode::Independent => (0..size).map(|_| (rng.next_u64() as u32) & (size as u32 - 1)).collect(),
            CodebookMode::Distinct => {
                let mut t: Vec<u32> = (0..size as u32).collect();
                t.shuffle(&mut rng);
                t
            }
        };
        Ok(Self::from_table(ell, w, ell_eps, rng_seed, mode, table))
    }

    fn from_table(ell: usize, w: usize, ell_eps: usize, rng_seed: u64, mode: CodebookMode, table: Vec<u32>) -> Self {
        let size = 1usize << ell;
        let mut counts = vec![0u32; size];
        let mut cell_of = vec![0u32; size];
        for (cell, &cw) in table.iter().enumerate() {
            counts[cw as usize] += 1;
            cell_of[cw as usize] = cell as u32;
        }
        Self { ell, w, ell_eps, k_s: ell - w - ell_eps, rng_seed, mode, table, counts, cell_of }
    }

    /// Replace the codeword of one cell (tests and diagnostics).
    pub fn with_planted_codeword(mut self, cell: usize, word: u32) -> Self {
        self.table[cell] = word & ((1u32 << self.ell) - 1);
        let (ell, w, e, s, m) = (self.ell, self.w, self.ell_eps, self.rng_seed, self.mode);
        Self::from_table(ell, w, e, s, m, self.table)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn w(&self) -> usize {
        self.w
    }
    pub fn ell_eps(&self) -> usize {
        self.ell_eps
    }
    pub fn k_s(&self) -> usize {
        self.k_s
    }
    pub fn k_w(&self) -> usize {
        self.ell - self.k_s
    }
    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }
    pub fn mode(&self) -> CodebookMode {
        self.mode
    }

    /// Codeword at `(bin, offset)` as an ℓ-bit integer, first symbol in the top bit.
    pub fn codeword(&self, bin: usize, offset: usize) -> u32 {
        self.table[(bin << self.k_w()) | offset]
    }

    /// Number of cells whose codeword occurs in at least one other cell.
    pub fn ambiguous_cells(&self) -> usize {
        self.table.iter().filter(|&&cw| self.counts[cw as usize] > 1).count()
    }

    /// Number of distinct words that occur more than once.
    pub fn duplicated_words(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 1).count()
    }

    /// Codeword selected by a column: first `k_s` bits give the bin, the rest
    /// the offset.
    pub fn encode(&self, column: &[u8]) -> Result<Vec<u8>> {
        if column.len() != self.ell {
            return Err(Error::usage(format!("column length {} != ell = {}", column.len(), self.ell)));
        }
        Ok(index_to_bits(self.table[bits_to_index(column) as usize], self.ell))
    }

    /// Invert [`encode`](Self::encode) when the word occurs exactly once.
    pub fn decode(&self, x: &[u8]) -> std::result::Result<Vec<u8>, DecodeError> {
        if x.len() != self.ell {
            return Err(DecodeError::Absent);
        }
        let cw = bits_to_index(x) as usize;
        match self.counts[cw] {
            0 => Err(DecodeError::Absent),
            1 => Ok(index_to_bits(self.cell_of[cw], self.ell)),
            k => Err(DecodeError::Ambiguous(k as usize)),
        }
    }
}

/// Either codec.
#[derive(Clone, Debug)]
pub enum ISCode {
    Linear(LinearISCode),
    Nonlinear(NonlinearISCode),
}

impl ISCode {
    pub fn ell(&self) -> usize {
        match self {
            ISCode::Linear(c) => c.ell(),
            ISCode::Nonlinear(c) => c.ell(),
        }
    }
    pub fn k_s(&self) -> usize {
        match self {
            ISCode::Linear(c) => c.k_s(),
            ISCode::Nonlinear(c) => c.k_s(),
        }
    }
    pub fn w(&self) -> usize {
        match self {
            ISCode::Linear(c) => c.w(),
            ISCode::Nonlinear(c) => c.w(),
        }
    }

    /// Serialize to the `NUHCODE1` descriptor format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(CODE_MAGIC);
        match self {
            ISCode::Linear(c) => {
                w.u8(0);
                c.field.write_to(&mut w);
                w.u32(c.ell as u32);
                w.u32(c.w() as u32);
                w.u32(c.k_s as u32);
                w.u32(0);
                w.u64(c.rng_seed);
                w.u8(match c.construction {
                    LinearConstruction::Gabidulin => 0,
                    LinearConstruction::RandomMds => 1,
                    LinearConstruction::Explicit => 2,
                });
                w.u8(c.all_subsets_secure as u8);
                c.g_is.write_to(&mut w);
                c.h.write_to(&mut w);
                c.g_tilde.write_to(&mut w);
            }
            ISCode::Nonlinear(c) => {
                w.u8(1);
                FieldSpec::binary(1).expect("GF(2)").write_to(&mut w);
                w.u32(c.ell as u32);
                w.u32(c.w as u32);
                w.u32(c.k_s as u32);
                w.u32(c.ell_eps as u32);
                w.u64(c.rng_seed);
                w.u8(match c.mode {
                    CodebookMode::Independent => 0,
                    CodebookMode::Distinct => 1,
                });
                w.u8(0);
            }
        }
        w.into_inner()
    }

    /// Parse a descriptor. Linear codes are rebuilt from the stored `G_IS`
    /// and the stored `H`, `G̃` must match; nonlinear codebooks are
    /// regenerated from their seed.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(CODE_MAGIC)?;
        let kind = r.u8()?;
        let field = FieldSpec::read_from(&mut r)?;
        let ell = r.u32()? as usize;
        let w = r.u32()? as usize;
        let k_s = r.u32()? as usize;
        let ell_eps = r.u32()? as usize;
        let rng_seed = r.u64()?;
        let tag = r.u8()?;
        let flag = r.u8()?;
        let code = match kind {
            0 => {
                let g_is = FieldMatrix::read_from(&field, &mut r)?;
                let h = FieldMatrix::read_from(&field, &mut r)?;
                let g_tilde = FieldMatrix::read_from(&field, &mut r)?;
                if g_is.rows() != ell || k_s + w != ell || k_s >= ell {
                    return Err(Error::format("linear descriptor dimensions inconsistent"));
                }
                let mut code = Self::linear_from_parts(g_is, k_s, rng_seed, tag)?;
                code.all_subsets_secure = flag == 1;
                if code.h != h || code.g_tilde != g_tilde {
                    return Err(Error::format("stored H or G~ does not match G_IS"));
                }
                ISCode::Linear(code)
            }
            1 => {
                let mode = match tag {
                    0 => CodebookMode::Independent,
                    1 => CodebookMode::Distinct,
                    t => return Err(Error::format(format!("unknown codebook mode {t}"))),
                };
                let code = NonlinearISCode::build(ell, w, ell_eps, rng_seed, mode)
                    .map_err(|e| Error::format(e.to_string()))?;
                if code.k_s != k_s {
                    return Err(Error::format("nonlinear descriptor k_s inconsistent"));
                }
                ISCode::Nonlinear(code)
            }
            k => return Err(Error::format(format!("unknown codec kind {k}"))),
        };
        r.finish()?;
        Ok(code)
    }

    fn linear_from_parts(g_is: FieldMatrix, k_s: usize, rng_seed: u64, tag: u8) -> Result<LinearISCode> {
        let construction = match tag {
            0 => LinearConstruction::Gabidulin,
            1 => LinearConstruction::RandomMds,
            2 => LinearConstruction::Explicit,
            t => return Err(Error::format(format!("unknown linear construction {t}"))),
        };
        LinearISCode::assemble(g_is, k_s, rng_seed, construction).map_err(|e| Error::format(e.to_string()))
    }
}
