//! End-to-end hybrid transmission over ℓ links.
//!
//! Per frame of ℓ source blocks of n bits:
//!
//! 1. draw a uniform seed matrix `U` (ℓ×d_J) and polar-encode every row;
//! 2. map each compressed row of ñ bits to `⌈ñ/μ⌉` field symbols and mix the
//!    columns with the individually secure code;
//! 3. encrypt the first `c` mixed rows and the reflowed seed `U_C`
//!    (c×γ, γ = ⌈ℓ·d_J/c⌉) with the block cipher;
//! 4. emit one byte segment per link.
//!
//! Decoding runs the same steps backwards.

use crate::analysis::Scheme;
use crate::bits::{pack_bits, unpack_bits, BitMatrix};
use crate::cipher::{BlockCipher, NullCipher};
use crate::error::{Error, Result};
use crate::gf::{FieldKind, FieldMatrix, FieldSpec};
use crate::io::{Reader, Writer};
use crate::is_channel::{ISCode, LinearISCode};
use crate::polar::{source_decode, source_encode, PolarProfile};
use rand::{Rng, RngCore, SeedableRng};
use sha2::{Digest, Sha256};
use std::fmt;
use std::sync::Arc;

const TX_MAGIC: &[u8; 6] = b"NUHTX1";
const TX_VERSION: u8 = 1;

/// How the `c` encrypted rows (and the seed) are cut into cipher blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncryptionLayout {
    /// Column-major stream over the c rows, cut into plaintext-size blocks;
    /// ciphertext blocks are dealt round-robin over the c links.
    Column,
    /// One block per group of μ columns (`c·μ` bits, row-major inside the
    /// group); the cipher plaintext size must equal `c·μ`.
    Symbol,
    /// Each row is cut into blocks on its own and stays on its own link.
    Row,
}

impl EncryptionLayout {
    fn tag(self) -> u8 {
        match self {
            EncryptionLayout::Column => 0,
            EncryptionLayout::Symbol => 1,
            EncryptionLayout::Row => 2,
        }
    }
    fn from_tag(t: u8) -> Result<Self> {
        Ok(match t {
            0 => EncryptionLayout::Column,
            1 => EncryptionLayout::Symbol,
            2 => EncryptionLayout::Row,
            _ => return Err(Error::format(format!("unknown layout tag {t}"))),
        })
    }
}

/// Where the seed matrix travels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedPlacement {
    /// Reflowed to `U_C`, encrypted, appended to this link's segment.
    Encrypted { link: usize },
    /// Raw ℓ·d_J bits appended to this link's segment (IT-only deployments
    /// where the link is assumed untapped).
    Plaintext { link: usize },
}

impl SeedPlacement {
    /// Encrypted seed on the second link when at least two links are
    /// encrypted, otherwise on the single encrypted link.
    pub fn default_for(c: usize) -> Self {
        SeedPlacement::Encrypted { link: if c >= 2 { 1 } else { 0 } }
    }
    pub fn link(&self) -> usize {
        match *self {
            SeedPlacement::Encrypted { link } | SeedPlacement::Plaintext { link } => link,
        }
    }
    pub fn encrypted(&self) -> bool {
        matches!(self, SeedPlacement::Encrypted { .. })
    }
}

/// Immutable pipeline configuration.
#[derive(Clone)]
pub struct PipelineConfig {
    ell: usize,
    c: usize,
    code: Arc<ISCode>,
    profile: Arc<PolarProfile>,
    cipher: Arc<dyn BlockCipher>,
    layout: EncryptionLayout,
    seed: SeedPlacement,
}

impl fmt::Debug for PipelineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PipelineConfig")
            .field("ell", &self.ell)
            .field("c", &self.c)
            .field("n", &self.profile.n())
            .field("n_tilde", &self.profile.n_tilde())
            .field("d_j", &self.profile.d_j())
            .field("mu", &self.mu())
            .field("cipher", &self.cipher.name())
            .field("layout", &self.layout)
            .field("seed", &self.seed)
            .finish()
    }
}

impl PipelineConfig {
    /// Validate and assemble a configuration. The linear code must protect
    /// `k_s = c` messages against `w = ℓ − c` taps over a binary field.
    pub fn new(
        ell: usize,
        c: usize,
        code: Arc<ISCode>,
        profile: Arc<PolarProfile>,
        cipher: Arc<dyn BlockCipher>,
        layout: EncryptionLayout,
        seed: SeedPlacement,
    ) -> Result<Self> {
        if ell < 2 || c < 1 || c >= ell {
            return Err(Error::usage(format!("need 1 <= c < ell, got c={c}, ell={ell}")));
        }
        if code.ell() != ell {
            return Err(Error::usage(format!("code has ell={}, config has {ell}", code.ell())));
        }
        match code.as_ref() {
            ISCode::Linear(lin) => {
                if lin.k_s() != c {
                    return Err(Error::usage(format!("linear code must have k_s = c = {c}, has {}", lin.k_s())));
                }
                if lin.field().kind() != FieldKind::BinaryExtension {
                    return Err(Error::usage("pipeline needs a binary extension field for bit mapping"));
                }
                if (lin.field().mu() as usize) < ell {
                    return Err(Error::usage(format!("need mu >= ell, got mu={} ell={ell}", lin.field().mu())));
                }
            }
            ISCode::Nonlinear(nl) => {
                if nl.w() != ell - c {
                    return Err(Error::usage(format!(
                        "nonlinear code must have w = ell - c = {}, has {}",
                        ell - c,
                        nl.w()
                    )));
                }
            }
        }
        if seed.link() >= ell {
            return Err(Error::usage(format!("seed link {} out of range", seed.link())));
        }
        if cipher.plaintext_bits() == 0 {
            return Err(Error::usage("cipher with empty plaintext block"));
        }
        let cfg = Self { ell, c, code, profile, cipher, layout, seed };
        if layout == EncryptionLayout::Symbol && cfg.cipher.plaintext_bits() != c * cfg.mu() {
            return Err(Error::usage(format!(
                "symbol layout needs a {}-bit cipher block, cipher takes {}",
                c * cfg.mu(),
                cfg.cipher.plaintext_bits()
            )));
        }
        Ok(cfg)
    }

    pub fn ell(&self) -> usize {
        self.ell
    }
    pub fn c(&self) -> usize {
        self.c
    }
    pub fn w(&self) -> usize {
        self.ell - self.c
    }
    pub fn code(&self) -> &ISCode {
        &self.code
    }
    pub fn profile(&self) -> &PolarProfile {
        &self.profile
    }
    pub fn cipher(&self) -> &dyn BlockCipher {
        self.cipher.as_ref()
    }
    pub fn layout(&self) -> EncryptionLayout {
        self.layout
    }
    pub fn seed_placement(&self) -> SeedPlacement {
        self.seed
    }
    pub fn n(&self) -> usize {
        self.profile.n()
    }

    /// Bits per channel symbol: μ for the linear code, 1 for the nonlinear one.
    pub fn mu(&self) -> usize {
        match self.code.as_ref() {
            ISCode::Linear(l) => l.field().mu() as usize,
            ISCode::Nonlinear(_) => 1,
        }
    }

    /// SHA-256 over everything both ends must agree on.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"nuhuncc-config-v1");
        h.update((self.ell as u64).to_le_bytes());
        h.update((self.c as u64).to_le_bytes());
        h.update(self.profile.to_bytes());
        h.update(self.code.to_bytes());
        h.update(self.cipher.name().as_bytes());
        h.update((self.cipher.plaintext_bits() as u64).to_le_bytes());
        h.update((self.cipher.ciphertext_bits() as u64).to_le_bytes());
        h.update([self.layout.tag(), self.seed.encrypted() as u8]);
        h.update((self.seed.link() as u64).to_le_bytes());
        h.finalize().into()
    }

    fn geometry(&self) -> Geometry {
        let mu = self.mu();
        let n_tilde = self.profile.n_tilde();
        let symbols = n_tilde.div_ceil(mu);
        let row_bits = symbols * mu;
        let pt = self.cipher.plaintext_bits();
        let ct = self.cipher.ciphertext_bits();
        let c = self.c;
        let data_blocks = self.block_plan(c, row_bits);
        let d_j = self.profile.d_j();
        let seed_bits = self.ell * d_j;
        let gamma = seed_bits.div_ceil(c);
        let seed_blocks = if self.seed.encrypted() { self.block_plan(c, gamma) } else { Vec::new() };
        Geometry { mu, n_tilde, symbols, row_bits, pt, ct, data_blocks, seed_bits, gamma, seed_blocks }
    }

    // Number of cipher blocks per encrypted link for a c×len matrix.
    fn block_plan(&self, c: usize, len: usize) -> Vec<usize> {
        let pt = self.cipher.plaintext_bits();
        match self.layout {
            EncryptionLayout::Column => {
                let total = (c * len).div_ceil(pt);
                (0..c).map(|i| total / c + usize::from(i < total % c)).collect()
            }
            EncryptionLayout::Symbol => {
                let total = len.div_ceil(self.mu());
                (0..c).map(|i| total / c + usize::from(i < total % c)).collect()
            }
            EncryptionLayout::Row => vec![len.div_ceil(pt); c],
        }
    }
}

#[derive(Clone, Debug)]
struct Geometry {
    mu: usize,
    n_tilde: usize,
    symbols: usize,
    row_bits: usize,
    pt: usize,
    ct: usize,
    data_blocks: Vec<usize>,
    seed_bits: usize,
    gamma: usize,
    seed_blocks: Vec<usize>,
}

/// Cut a c×len bit matrix into plaintext blocks per the layout. Returns
/// `(link, block)` pairs in transmission order.
fn cut_blocks(rows: &[Vec<u8>], layout: EncryptionLayout, pt: usize, mu: usize) -> Vec<(usize, Vec<u8>)> {
    let c = rows.len();
    let len = rows.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    match layout {
        EncryptionLayout::Column => {
            let stream: Vec<u8> = (0..len).flat_map(|j| rows.iter().map(move |r| r[j])).collect();
            for (k, chunk) in stream.chunks(pt).enumerate() {
                let mut b = chunk.to_vec();
                b.resize(pt, 0);
                out.push((k % c, b));
            }
        }
        EncryptionLayout::Symbol => {
            for (k, g) in (0..len.div_ceil(mu)).enumerate() {
                let mut b = Vec::with_capacity(c * mu);
                for r in rows {
                    for j in g * mu..(g + 1) * mu {
                        b.push(r.get(j).copied().unwrap_or(0));
                    }
                }
                out.push((k % c, b));
            }
        }
        EncryptionLayout::Row => {
            for (i, r) in rows.iter().enumerate() {
                for chunk in r.chunks(pt) {
                    let mut b = chunk.to_vec();
                    b.resize(pt, 0);
                    out.push((i, b));
                }
            }
        }
    }
    out
}

/// Inverse of [`cut_blocks`]: `blocks[i]` are link i's decrypted blocks in order.
fn join_blocks(blocks: &[Vec<Vec<u8>>], layout: EncryptionLayout, c: usize, len: usize, mu: usize) -> Vec<Vec<u8>> {
    let mut rows = vec![vec![0u8; len]; c];
    match layout {
        EncryptionLayout::Column | EncryptionLayout::Symbol => {
            // Undo the round-robin deal.
            let total: usize = blocks.iter().map(|b| b.len()).sum();
            let ordered: Vec<&Vec<u8>> = (0..total).map(|k| &blocks[k % c][k / c]).collect();
            if layout == EncryptionLayout::Column {
                let stream: Vec<u8> = ordered.iter().flat_map(|b| b.iter().copied()).collect();
                for j in 0..len {
                    for (i, row) in rows.iter_mut().enumerate() {
                        row[j] = stream[j * c + i];
                    }
                }
            } else {
                for (g, b) in ordered.iter().enumerate() {
                    for (i, row) in rows.iter_mut().enumerate() {
                        for t in 0..mu {
                            let j = g * mu + t;
                            if j < len {
                                row[j] = b[i * mu + t];
                            }
                        }
                    }
                }
            }
        }
        EncryptionLayout::Row => {
            for (i, row) in rows.iter_mut().enumerate() {
                let stream: Vec<u8> = blocks[i].iter().flat_map(|b| b.iter().copied()).collect();
                row.copy_from_slice(&stream[..len]);
            }
        }
    }
    rows
}

/// Flatten `U` row-major and reflow into c rows of γ bits (zero padded).
pub fn reflow_seed(u: &[Vec<u8>], c: usize) -> (Vec<Vec<u8>>, usize) {
    let flat: Vec<u8> = u.iter().flat_map(|r| r.iter().copied()).collect();
    let gamma = flat.len().div_ceil(c);
    let pad = gamma * c - flat.len();
    let mut rows: Vec<Vec<u8>> = (0..c).map(|i| flat.iter().skip(i * gamma).take(gamma).copied().collect()).collect();
    for r in rows.iter_mut() {
        r.resize(gamma, 0);
    }
    (rows, pad)
}

/// Inverse of [`reflow_seed`].
pub fn unreflow_seed(u_c: &[Vec<u8>], ell: usize, d_j: usize) -> Vec<Vec<u8>> {
    let flat: Vec<u8> = u_c.iter().flat_map(|r| r.iter().copied()).collect();
    (0..ell).map(|i| flat[i * d_j..(i + 1) * d_j].to_vec()).collect()
}

/// Transmission header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxHeader {
    pub config_digest: [u8; 32],
    pub ell: u32,
    pub c: u32,
    pub n: u32,
    pub n_tilde: u32,
    pub d_j: u32,
    pub mu: u32,
    pub layout: EncryptionLayout,
    pub seed: SeedPlacement,
    pub plaintext_bits: u32,
    pub ciphertext_bits: u32,
    pub frames: u32,
    /// Length of the original byte payload, when encoded from bytes.
    pub payload_bytes: u64,
}

/// Per-link byte segments for every frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transmission {
    pub header: TxHeader,
    /// `links[i][f]` is link i's segment for frame f.
    pub links: Vec<Vec<Vec<u8>>>,
}

impl Transmission {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut w = Writer::new();
        w.bytes(TX_MAGIC);
        w.u8(TX_VERSION);
        w.bytes(&h.config_digest);
        for v in [h.ell, h.c, h.n, h.n_tilde, h.d_j, h.mu] {
            w.u32(v);
        }
        w.u8(h.layout.tag());
        w.u8(h.seed.encrypted() as u8);
        w.u32(h.seed.link() as u32);
        w.u32(h.plaintext_bits);
        w.u32(h.ciphertext_bits);
        w.u32(h.frames);
        w.u64(h.payload_bytes);
        for link in &self.links {
            for seg in link {
                w.blob(seg);
            }
        }
        w.into_inner()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(TX_MAGIC)?;
        let v = r.u8()?;
        if v != TX_VERSION {
            return Err(Error::format(format!("unsupported transmission version {v}")));
        }
        let mut config_digest = [0u8; 32];
        config_digest.copy_from_slice(r.take(32)?);
        let mut nums = [0u32; 6];
        for x in nums.iter_mut() {
            *x = r.u32()?;
        }
        let [ell, c, n, n_tilde, d_j, mu] = nums;
        let layout = EncryptionLayout::from_tag(r.u8()?)?;
        let enc = r.u8()?;
        let link = r.u32()? as usize;
        let seed = match enc {
            1 => SeedPlacement::Encrypted { link },
            0 => SeedPlacement::Plaintext { link },
            _ => return Err(Error::format("bad seed placement flag")),
        };
        let plaintext_bits = r.u32()?;
        let ciphertext_bits = r.u32()?;
        let frames = r.u32()?;
        let payload_bytes = r.u64()?;
        if !(2..=64).contains(&ell) || c == 0 || c >= ell || link >= ell as usize {
            return Err(Error::format("transmission link counts out of range"));
        }
        let mut links = Vec::with_capacity(ell as usize);
        for _ in 0..ell {
            let mut segs = Vec::new();
            for _ in 0..frames {
                segs.push(r.blob()?.to_vec());
            }
            links.push(segs);
        }
        r.finish()?;
        Ok(Self {
            header: TxHeader {
                config_digest,
                ell,
                c,
                n,
                n_tilde,
                d_j,
                mu,
                layout,
                seed,
                plaintext_bits,
                ciphertext_bits,
                frames,
                payload_bytes,
            },
            links,
        })
    }

    /// Total payload bits over all links and frames (segment bytes × 8).
    pub fn payload_bits(&self) -> u64 {
        self.links.iter().flatten().map(|s| 8 * s.len() as u64).sum()
    }
}

/// Bit-level bookkeeping of one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PayloadAccounting {
    pub ell: usize,
    pub c: usize,
    pub n_tilde: usize,
    pub d_j: usize,
    pub plaintext_bits: usize,
    pub ciphertext_bits: usize,
    /// Zero bits appended to each row to fill the last symbol.
    pub symbol_pad: usize,
    /// Zero bits filling the last data cipher blocks.
    pub data_block_pad: usize,
    /// Zero bits appended when reflowing the seed into c rows.
    pub seed_reflow_pad: usize,
    /// Zero bits filling the last seed cipher blocks.
    pub seed_block_pad: usize,
    pub seed_encrypted: bool,
    /// Bits actually emitted on all links, before byte packing.
    pub total_bits: usize,
}

impl PayloadAccounting {
    /// Checks, scaled by the plaintext block size to stay in integers,
    /// `total = ñ(ℓ−c) + ñ·c·(ct/pt) + ℓ·d_J·(ct/pt) + padding`.
    pub fn identity_holds(&self) -> bool {
        let (pt, ct) = (self.plaintext_bits as u128, self.ciphertext_bits as u128);
        let (ell, c, nt, dj) = (self.ell as u128, self.c as u128, self.n_tilde as u128, self.d_j as u128);
        let sp = self.symbol_pad as u128;
        let mut rhs = pt * (nt + sp) * (ell - c) + ct * (c * (nt + sp) + self.data_block_pad as u128);
        if self.seed_encrypted {
            rhs += ct * (ell * dj + self.seed_reflow_pad as u128 + self.seed_block_pad as u128);
        } else {
            rhs += pt * ell * dj;
        }
        pt * self.total_bits as u128 == rhs
    }

    /// Data rate `ℓ·n / total_bits`.
    pub fn rate(&self, n: usize) -> f64 {
        (self.ell * n) as f64 / self.total_bits as f64
    }
}

impl PipelineConfig {
    /// Bookkeeping for one frame under this configuration.
    pub fn accounting(&self) -> PayloadAccounting {
        let g = self.geometry();
        let c = self.c;
        let data_blocks: usize = g.data_blocks.iter().sum();
        let seed_blocks: usize = g.seed_blocks.iter().sum();
        let total_bits = (self.ell - c) * g.row_bits
            + data_blocks * g.ct
            + if self.seed.encrypted() { seed_blocks * g.ct } else { g.seed_bits };
        PayloadAccounting {
            ell: self.ell,
            c,
            n_tilde: g.n_tilde,
            d_j: self.profile.d_j(),
            plaintext_bits: g.pt,
            ciphertext_bits: g.ct,
            symbol_pad: g.row_bits - g.n_tilde,
            data_block_pad: data_blocks * g.pt - c * g.row_bits,
            seed_reflow_pad: if self.seed.encrypted() { c * g.gamma - g.seed_bits } else { 0 },
            seed_block_pad: if self.seed.encrypted() { seed_blocks * g.pt - c * g.gamma } else { 0 },
            seed_encrypted: self.seed.encrypted(),
            total_bits,
        }
    }
}

fn random_bits(n: usize, rng: &mut dyn RngCore) -> Vec<u8> {
    (0..n).map(|_| rng.gen::<bool>() as u8).collect()
}

// IS-encode the ℓ compressed rows (each row_bits long) into ℓ rows of bits.
fn mix(cfg: &PipelineConfig, m: &[Vec<u8>], g: &Geometry) -> Result<Vec<Vec<u8>>> {
    let ell = cfg.ell;
    match cfg.code.as_ref() {
        ISCode::Linear(code) => {
            let f = code.field();
            let mu = g.mu;
            let mut data = vec![0u32; ell * g.symbols];
            for (i, row) in m.iter().enumerate() {
                for s in 0..g.symbols {
                    data[i * g.symbols + s] = (0..mu).fold(0u32, |acc, b| acc | ((row[s * mu + b] as u32) << b));
                }
            }
            let x = code.encode(&FieldMatrix::from_vec(f, ell, g.symbols, data)?)?;
            Ok((0..ell)
                .map(|i| (0..g.row_bits).map(|j| ((x.get(i, j / mu) >> (j % mu)) & 1) as u8).collect())
                .collect())
        }
        ISCode::Nonlinear(code) => {
            let mut out = vec![vec![0u8; g.row_bits]; ell];
            let mut col = vec![0u8; ell];
            for j in 0..g.row_bits {
                for i in 0..ell {
                    col[i] = m[i][j];
                }
                for (i, b) in code.encode(&col)?.into_iter().enumerate() {
                    out[i][j] = b;
                }
            }
            Ok(out)
        }
    }
}

fn unmix(cfg: &PipelineConfig, x: &[Vec<u8>], g: &Geometry) -> Result<Vec<Vec<u8>>> {
    let ell = cfg.ell;
    match cfg.code.as_ref() {
        ISCode::Linear(code) => {
            let f = code.field();
            let mu = g.mu;
            let mut data = vec![0u32; ell * g.symbols];
            for (i, row) in x.iter().enumerate() {
                for s in 0..g.symbols {
                    data[i * g.symbols + s] = (0..mu).fold(0u32, |acc, b| acc | ((row[s * mu + b] as u32) << b));
                }
            }
            let m = code.decode(&FieldMatrix::from_vec(f, ell, g.symbols, data)?)?;
            Ok((0..ell)
                .map(|i| (0..g.row_bits).map(|j| ((m.get(i, j / mu) >> (j % mu)) & 1) as u8).collect())
                .collect())
        }
        ISCode::Nonlinear(code) => {
            let mut out = vec![vec![0u8; g.row_bits]; ell];
            let mut col = vec![0u8; ell];
            for j in 0..g.row_bits {
                for i in 0..ell {
                    col[i] = x[i][j];
                }
                let m = code.decode(&col).map_err(|kind| Error::Decode { column: j, kind })?;
                for (i, b) in m.into_iter().enumerate() {
                    out[i][j] = b;
                }
            }
            Ok(out)
        }
    }
}

/// Intermediate values of one encoded frame, exposed for analysis and tests.
#[derive(Clone, Debug)]
pub struct FrameTrace {
    /// Seed matrix `U` (ℓ×d_J).
    pub seed: Vec<Vec<u8>>,
    /// Compressed rows, padded to whole symbols.
    pub compressed: Vec<Vec<u8>>,
    /// Mixed rows `X` as bits.
    pub mixed: Vec<Vec<u8>>,
    /// Link segments as bits before byte packing.
    pub segments: Vec<Vec<u8>>,
}

fn encode_frame(cfg: &PipelineConfig, v: &[Vec<u8>], rng: &mut dyn RngCore) -> Result<FrameTrace> {
    let g = cfg.geometry();
    let ell = cfg.ell;
    let c = cfg.c;
    let prof = cfg.profile.as_ref();
    if v.len() != ell || v.iter().any(|r| r.len() != prof.n()) {
        return Err(Error::usage(format!("source matrix must be {ell}x{}", prof.n())));
    }
    let seed: Vec<Vec<u8>> = (0..ell).map(|_| random_bits(prof.d_j(), rng)).collect();
    let mut compressed = Vec::with_capacity(ell);
    for (row, u) in v.iter().zip(&seed) {
        let mut m = source_encode(row, u, prof)?;
        m.resize(g.row_bits, 0);
        compressed.push(m);
    }
    let mixed = mix(cfg, &compressed, &g)?;
    let mut segments: Vec<Vec<u8>> = vec![Vec::new(); ell];
    for (link, block) in cut_blocks(&mixed[..c], cfg.layout, g.pt, g.mu) {
        segments[link].extend(cfg.cipher.encrypt_block(&block, rng)?);
    }
    for i in c..ell {
        segments[i].extend_from_slice(&mixed[i]);
    }
    let seed_link = cfg.seed.link();
    if cfg.seed.encrypted() {
        let (u_c, _) = reflow_seed(&seed, c);
        for (_, block) in cut_blocks(&u_c, cfg.layout, g.pt, g.mu) {
            let ctxt = cfg.cipher.encrypt_block(&block, rng)?;
            segments[seed_link].extend(ctxt);
        }
    } else {
        for u in &seed {
            segments[seed_link].extend_from_slice(u);
        }
    }
    Ok(FrameTrace { seed, compressed, mixed, segments })
}

fn decode_frame(cfg: &PipelineConfig, segments: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
    let g = cfg.geometry();
    let ell = cfg.ell;
    let c = cfg.c;
    let prof = cfg.profile.as_ref();
    let seed_link = cfg.seed.link();
    let seed_enc_blocks: usize = g.seed_blocks.iter().sum();
    let seed_len = if cfg.seed.encrypted() { seed_enc_blocks * g.ct } else { g.seed_bits };
    let mut data_blocks: Vec<Vec<Vec<u8>>> = vec![Vec::new(); c];
    let mut plain_rows: Vec<Vec<u8>> = Vec::with_capacity(ell - c);
    let mut seed_stream: Vec<u8> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let body = if i < c { g.data_blocks[i] * g.ct } else { g.row_bits };
        let bits = body + if i == seed_link { seed_len } else { 0 };
        if seg.len() != bits.div_ceil(8) {
            return Err(Error::format(format!(
                "link {i} segment has {} bytes, expected {}",
                seg.len(),
                bits.div_ceil(8)
            )));
        }
        let all = unpack_bits(seg, bits);
        if pack_bits(&all) != *seg {
            return Err(Error::format(format!("link {i} segment has nonzero padding")));
        }
        if i < c {
            for chunk in all[..body].chunks(g.ct) {
                data_blocks[i].push(cfg.cipher.decrypt_block(chunk)?);
            }
        } else {
            plain_rows.push(all[..body].to_vec());
        }
        if i == seed_link {
            seed_stream = all[body..].to_vec();
        }
    }
    let mut mixed = join_blocks(&data_blocks, cfg.layout, c, g.row_bits, g.mu);
    mixed.extend(plain_rows);
    let seed = if cfg.seed.encrypted() {
        // Seed blocks are cut as in cut_blocks; rebuild the per-link lists.
        let mut per_link: Vec<Vec<Vec<u8>>> = vec![Vec::new(); c];
        let total = seed_stream.len() / g.ct;
        for k in 0..total {
            let block = cfg.cipher.decrypt_block(&seed_stream[k * g.ct..(k + 1) * g.ct])?;
            let link = match cfg.layout {
                EncryptionLayout::Row => {
                    let per = g.seed_blocks[0].max(1);
                    k / per
                }
                _ => k % c,
            };
            per_link[link].push(block);
        }
        let u_c = join_blocks(&per_link, cfg.layout, c, g.gamma, g.mu);
        unreflow_seed(&u_c, ell, prof.d_j())
    } else {
        (0..ell).map(|i| seed_stream[i * prof.d_j()..(i + 1) * prof.d_j()].to_vec()).collect()
    };
    let compressed = unmix(cfg, &mixed, &g)?;
    let src = prof.source();
    compressed.iter().zip(&seed).map(|(m, u)| source_decode(&m[..g.n_tilde], u, prof, src)).collect()
}

fn header_for(cfg: &PipelineConfig, frames: usize, payload_bytes: u64) -> TxHeader {
    TxHeader {
        config_digest: cfg.digest(),
        ell: cfg.ell as u32,
        c: cfg.c as u32,
        n: cfg.n() as u32,
        n_tilde: cfg.profile.n_tilde() as u32,
        d_j: cfg.profile.d_j() as u32,
        mu: cfg.mu() as u32,
        layout: cfg.layout,
        seed: cfg.seed,
        plaintext_bits: cfg.cipher.plaintext_bits() as u32,
        ciphertext_bits: cfg.cipher.ciphertext_bits() as u32,
        frames: frames as u32,
        payload_bytes,
    }
}

fn rows_of(v: &BitMatrix) -> Vec<Vec<u8>> {
    (0..v.rows()).map(|r| v.row_bits(r)).collect()
}

/// Encode one ℓ×n source matrix, also returning the intermediate values.
pub fn encode_traced(cfg: &PipelineConfig, v: &BitMatrix, rng: &mut dyn RngCore) -> Result<(Transmission, FrameTrace)> {
    let trace = encode_frame(cfg, &rows_of(v), rng)?;
    let links = trace.segments.iter().map(|s| vec![pack_bits(s)]).collect();
    Ok((Transmission { header: header_for(cfg, 1, 0), links }, trace))
}

/// Encode one ℓ×n source matrix.
pub fn encode_all(cfg: &PipelineConfig, v: &BitMatrix, rng: &mut dyn RngCore) -> Result<Transmission> {
    Ok(encode_traced(cfg, v, rng)?.0)
}

/// Encode a sequence of frames.
pub fn encode_frames(cfg: &PipelineConfig, frames: &[BitMatrix], rng: &mut dyn RngCore) -> Result<Transmission> {
    let mut links: Vec<Vec<Vec<u8>>> = vec![Vec::with_capacity(frames.len()); cfg.ell];
    for v in frames {
        let trace = encode_frame(cfg, &rows_of(v), rng)?;
        for (l, s) in links.iter_mut().zip(&trace.segments) {
            l.push(pack_bits(s));
        }
    }
    Ok(Transmission { header: header_for(cfg, frames.len(), 0), links })
}

fn check_header(cfg: &PipelineConfig, t: &Transmission) -> Result<()> {
    let h = &t.header;
    if h.config_digest != cfg.digest() {
        return Err(Error::format("transmission was produced under a different configuration"));
    }
    if t.links.len() != cfg.ell || t.links.iter().any(|l| l.len() != h.frames as usize) {
        return Err(Error::format("transmission link/frame structure inconsistent"));
    }
    Ok(())
}

/// Decode every frame of a transmission.
pub fn decode_frames(cfg: &PipelineConfig, t: &Transmission) -> Result<Vec<BitMatrix>> {
    check_header(cfg, t)?;
    (0..t.header.frames as usize)
        .map(|f| {
            let segs: Vec<Vec<u8>> = t.links.iter().map(|l| l[f].clone()).collect();
            let rows = decode_frame(cfg, &segs)?;
            BitMatrix::from_rows(&rows)
        })
        .collect()
}

/// Decode a single-frame transmission.
pub fn decode_all(cfg: &PipelineConfig, t: &Transmission) -> Result<BitMatrix> {
    if t.header.frames != 1 {
        return Err(Error::usage(format!("expected one frame, found {}", t.header.frames)));
    }
    Ok(decode_frames(cfg, t)?.remove(0))
}

/// Split bytes (LSB-first bits) into ℓ×n frames, zero-filling the last one.
pub fn frames_from_bytes(data: &[u8], ell: usize, n: usize) -> Result<Vec<BitMatrix>> {
    let bits = unpack_bits(data, data.len() * 8);
    let per = ell * n;
    let count = bits.len().div_ceil(per).max(1);
    (0..count)
        .map(|f| {
            let rows: Vec<Vec<u8>> = (0..ell)
                .map(|i| (0..n).map(|j| bits.get(f * per + i * n + j).copied().unwrap_or(0)).collect())
                .collect();
            BitMatrix::from_rows(&rows)
        })
        .collect()
}

/// Inverse of [`frames_from_bytes`], truncated to `len` bytes.
pub fn bytes_from_frames(frames: &[BitMatrix], len: usize) -> Vec<u8> {
    let bits: Vec<u8> = frames.iter().flat_map(|v| (0..v.rows()).flat_map(move |r| v.row_bits(r))).collect();
    let mut out = pack_bits(&bits);
    out.truncate(len);
    out
}

/// Outcome of the per-frame decodability check run by [`encode_bytes`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EncodeCheck {
    pub frames: usize,
    /// Frames the source decoder would not reconstruct exactly.
    pub lossy_frames: Vec<usize>,
}

/// Encode a byte payload; every frame is test-decoded at the source layer so
/// callers learn about frames that will not round-trip.
pub fn encode_bytes(cfg: &PipelineConfig, data: &[u8], rng: &mut dyn RngCore) -> Result<(Transmission, EncodeCheck)> {
    let frames = frames_from_bytes(data, cfg.ell, cfg.n())?;
    let prof = cfg.profile.as_ref();
    let src = prof.source();
    let mut links: Vec<Vec<Vec<u8>>> = vec![Vec::with_capacity(frames.len()); cfg.ell];
    let mut check = EncodeCheck { frames: frames.len(), lossy_frames: Vec::new() };
    for (f, v) in frames.iter().enumerate() {
        let rows = rows_of(v);
        let trace = encode_frame(cfg, &rows, rng)?;
        let ok =
            rows.iter().zip(&trace.compressed).zip(&trace.seed).all(|((row, m), u)| {
                source_decode(&m[..prof.n_tilde()], u, prof, src).map(|d| d == *row).unwrap_or(false)
            });
        if !ok {
            check.lossy_frames.push(f);
        }
        for (l, s) in links.iter_mut().zip(&trace.segments) {
            l.push(pack_bits(s));
        }
    }
    let header = header_for(cfg, frames.len(), data.len() as u64);
    Ok((Transmission { header, links }, check))
}

/// Decode a transmission produced by [`encode_bytes`].
pub fn decode_bytes(cfg: &PipelineConfig, t: &Transmission) -> Result<Vec<u8>> {
    let frames = decode_frames(cfg, t)?;
    Ok(bytes_from_frames(&frames, t.header.payload_bytes as usize))
}

/// Eavesdropper model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EveMode {
    /// Unbounded adversary tapping the listed links.
    It(Vec<usize>),
    /// Bounded adversary seeing every link.
    Crypto,
}

/// What an eavesdropper sees: the tapped links' segments, verbatim.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EveView {
    pub mode: EveMode,
    pub observed: Vec<(usize, Vec<Vec<u8>>)>,
}

/// Project a transmission onto an eavesdropper's taps.
pub fn eve_observe(t: &Transmission, mode: &EveMode) -> Result<EveView> {
    let ell = t.links.len();
    let idx: Vec<usize> = match mode {
        EveMode::Crypto => (0..ell).collect(),
        EveMode::It(w) => {
            if w.len() >= ell {
                return Err(Error::usage(format!("IT tap set of size {} must be smaller than ell={ell}", w.len())));
            }
            let mut s = w.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != w.len() || s.iter().any(|&i| i >= ell) {
                return Err(Error::usage("tap indices must be distinct and below ell"));
            }
            s
        }
    };
    Ok(EveView { mode: mode.clone(), observed: idx.into_iter().map(|i| (i, t.links[i].clone())).collect() })
}

/// Inputs of the three-file, three-server storage example.
#[derive(Clone)]
pub struct DemoScenario {
    /// Profile of the file source (block length = file size in bits).
    pub profile: Arc<PolarProfile>,
    /// Number of files and servers.
    pub ell: usize,
    /// Block cipher used by the encrypting schemes.
    pub cipher: Arc<dyn BlockCipher>,
    pub rng_seed: u64,
}

/// Stored sizes and rate of one scheme in the storage example.
#[derive(Clone, Debug, PartialEq)]
pub struct DemoReport {
    pub scheme: Scheme,
    /// Bits stored on each server.
    pub stored_bits: Vec<u64>,
    /// `ℓ·n`.
    pub source_bits: u64,
    /// `source_bits / Σ stored_bits`.
    pub rate: f64,
    /// False when the sizes come from a closed form rather than a run.
    pub simulated: bool,
    /// Whether decoding reproduced the files, when a decode was run.
    pub round_trip: Option<bool>,
}

impl DemoReport {
    fn new(
        scheme: Scheme,
        stored_bits: Vec<u64>,
        n: usize,
        ell: usize,
        simulated: bool,
        round_trip: Option<bool>,
    ) -> Self {
        let source_bits = (ell * n) as u64;
        let total: u64 = stored_bits.iter().sum();
        Self { scheme, stored_bits, source_bits, rate: source_bits as f64 / total as f64, simulated, round_trip }
    }
}

/// Store `ℓ` sampled files on `ℓ` servers with the given scheme.
///
/// The two reference schemes assume an ideal compressor producing
/// `⌈n·H(V)⌉` bits per file. The encrypting reference scheme runs the cipher
/// on uniform stand-ins of that length; the wiretap code is evaluated in
/// closed form with `w = ℓ − 1`. The two schemes of this crate run the full
/// pipeline and decode the result.
pub fn storage_demo(scheme: Scheme, sc: &DemoScenario) -> Result<DemoReport> {
    let prof = sc.profile.clone();
    let n = prof.n();
    let ell = sc.ell;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(sc.rng_seed);
    let compressed = (n as f64 * prof.source().entropy()).ceil() as usize;
    match scheme {
        Scheme::Num => {
            let pt = sc.cipher.plaintext_bits();
            let mut stored = Vec::with_capacity(ell);
            for _ in 0..ell {
                let bits = random_bits(compressed, &mut rng);
                let mut total = 0u64;
                for chunk in bits.chunks(pt) {
                    let mut b = chunk.to_vec();
                    b.resize(pt, 0);
                    total += sc.cipher.encrypt_block(&b, &mut rng)?.len() as u64;
                }
                stored.push(total);
            }
            Ok(DemoReport::new(scheme, stored, n, ell, true, None))
        }
        Scheme::NcWtc2 => {
            // Each file expands by ℓ/(ℓ−w) = ℓ and is spread evenly over the servers.
            Ok(DemoReport::new(scheme, vec![(ell * compressed) as u64; ell], n, ell, false, None))
        }
        Scheme::NuIs | Scheme::NuHuncc => {
            let mu = ell.max(2) as u32;
            let code = Arc::new(ISCode::Linear(LinearISCode::build(&FieldSpec::binary(mu)?, ell, 1, sc.rng_seed)?));
            let (cipher, layout, seed): (Arc<dyn BlockCipher>, _, _) = if scheme == Scheme::NuIs {
                (Arc::new(NullCipher::new(mu as usize)), EncryptionLayout::Symbol, SeedPlacement::Plaintext { link: 0 })
            } else {
                (sc.cipher.clone(), EncryptionLayout::Column, SeedPlacement::Encrypted { link: 1.min(ell - 1) })
            };
            let cfg = PipelineConfig::new(ell, 1, code, prof.clone(), cipher, layout, seed)?;
            let src = prof.source();
            let rows: Vec<Vec<u8>> = (0..ell).map(|_| src.sample(n, &mut rng)).collect();
            let v = BitMatrix::from_rows(&rows)?;
            let t = encode_all(&cfg, &v, &mut rng)?;
            let stored = t.links.iter().map(|l| l.iter().map(|s| 8 * s.len() as u64).sum()).collect();
            let ok = decode_all(&cfg, &t).map(|d| d == v).unwrap_or(false);
            Ok(DemoReport::new(scheme, stored, n, ell, true, Some(ok)))
        }
    }
}
