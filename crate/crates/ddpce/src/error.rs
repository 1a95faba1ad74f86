//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-supplied configuration (distribution parameters,
    /// dimension mismatches, malformed config keys, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A data file failed to parse; location is 1-based.
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    /// Samples do not support the requested polynomial degree.
    #[error(
        "degenerate samples: {distinct} distinct value(s) admit degree at most {max_degree}, \
         requested {requested}"
    )]
    DegenerateSamples {
        distinct: usize,
        max_degree: usize,
        requested: usize,
    },

    /// Gram matrix is not positive definite.
    #[error(
        "ill-conditioned design: Cholesky pivot {pivot:.3e} at index {index}; \
         lower the degree or add samples"
    )]
    IllConditioned { pivot: f64, index: usize },

    /// Least-squares design matrix is numerically rank deficient.
    #[error("rank-deficient design: |R[{index},{index}]| = {pivot:.3e} below tolerance")]
    RankDeficient { pivot: f64, index: usize },

    /// Fewer rows than columns in a dense fit.
    #[error(
        "underdetermined system: {rows} samples < {cols} basis terms; \
         use sparse selection or draw more samples"
    )]
    Underdetermined { rows: usize, cols: usize },

    /// Requested truncation produces too many basis terms.
    #[error("basis too large: {terms} terms exceeds cap of {cap}")]
    BasisTooLarge { terms: u128, cap: usize },

    /// A computation left the representable range (overflow/NaN).
    #[error("numeric range error: {0}")]
    NumericRange(String),

    /// Percent deviation against a zero reference statistic.
    #[error("percent deviation undefined: reference statistic is zero")]
    ZeroReference,

    /// An operation that requires data received none.
    #[error("empty input: {0}")]
    Empty(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps an error with the experiment case that produced it.
    pub fn annotate(self, case: &str) -> Error {
        Error::Config(format!("case {case}: {self}"))
    }
}
