//! Hybrid post-quantum multipath cryptosystem for non-uniform messages.
//!
//! Messages from a binary memoryless source are first compressed into
//! almost-uniform blocks with a polar source code and a short shared seed,
//! then mixed across ℓ links by an individually-secure channel code, and
//! finally only c of the ℓ links (plus the seed) are encrypted with a
//! post-quantum block cipher (McEliece over binary Goppa codes by default).
//!
//! Module map:
//! - [`gf`]: GF(2^μ) and GF(p) arithmetic and matrix algebra.
//! - [`bits`]: packed bit vectors and matrices.
//! - [`polar`]: polar transform, profile construction, source encoder and SC decoder.
//! - [`is_channel`]: linear coset code and non-linear binning code.
//! - [`cipher`]: pluggable block-cipher interface, McEliece/Goppa implementation.
//! - [`pipeline`]: end-to-end encode/decode over a simulated multipath.
//! - [`analysis`]: rate, complexity, bound, leakage and game calculators.
//!
//! This is a research artifact: no constant-time or side-channel guarantees.

pub mod analysis;
pub mod bits;
pub mod cipher;
pub mod error;
pub mod gf;
pub mod io;
pub mod is_channel;
pub mod pipeline;
pub mod polar;

pub use error::{Error, Result};
