use std::io;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range 1..={bound}")]
    OutOfRange { index: usize, bound: usize },

    #[error("invalid eta-quotient recipe: {0}")]
    InvalidRecipe(String),

    #[error("unknown form `{0}`")]
    UnknownForm(String),

    /// The CRT modulus available for a transform size cannot cover the proven
    /// coefficient bound. Never recovered from by wrapping.
    #[error(
        "CRT modulus insufficient: need more than {needed_bits} bits, \
         only {available_bits} bits of NTT primes exist for transform size 2^{log_size}"
    )]
    ModulusInsufficient {
        needed_bits: u64,
        available_bits: u64,
        log_size: u32,
    },

    #[error("symmetric-power coefficients are only supported at level 1 (got level {0})")]
    LevelNotSupported(u64),

    #[error("imaginary residue {residue:e} in local coefficient c_{k} (m = {m})")]
    ImaginaryResidue { residue: f64, k: usize, m: u32 },

    #[error("malformed cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
