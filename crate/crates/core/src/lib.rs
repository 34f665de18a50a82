//! Desk-scale toolkit for LPN-style noisy linear problems: exact `F_q`
//! arithmetic with a bit-packed `F_2` fast path, samplers for six LPN
//! variants, the product-to-single embedding, direct-product hardness
//! amplification machinery, brute-force solvers, the approximate-to-exact
//! sparsity filter, and numeric verifiers for the coding/probability bounds
//! the reductions rely on.
//!
//! Everything is deterministic given an explicit RNG handle; see [`seeding`]
//! for the seed-splitting scheme used by the CLI and test harnesses.

pub mod bounds;
pub mod embed;
pub mod field;
pub mod hs23;
pub mod instances;
pub mod noise;
pub mod seeding;
pub mod solvers;
pub mod sparsify;
pub mod stats;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or moduli of operands do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// A brute-force operation would exceed its enumeration guard.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A bound was requested outside the hypotheses under which it is claimed.
    #[error("out of regime: {0}")]
    OutOfRegime(String),
    /// The operation is not defined for this sparsity mode.
    #[error("unsupported sparsity mode: {0}")]
    UnsupportedMode(String),
    /// Malformed instance file.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
