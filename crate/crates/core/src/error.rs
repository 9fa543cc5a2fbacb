use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("infinite product not converged after {max_terms} factors")]
    Convergence { max_terms: usize },

    /// A denominator bracket fell below the singularity floor.
    #[error("singular denominator [{arg}] with |value| = {magnitude:e}")]
    Singular { arg: Complex64, magnitude: f64 },

    #[error("index error: {0}")]
    Index(String),

    #[error("inadmissible boundary: {0}")]
    Admissibility(String),

    #[error("enumeration of {chains} chains exceeds the cap of {cap}")]
    Capacity { chains: u128, cap: u64 },

    #[error("coincident spectral parameters u{j} and u{k}")]
    CoincidentSpectral { j: usize, k: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("genericity sampler exhausted after {0} attempts")]
    Exhausted(usize),

    #[error("invalid boundary spec: {0}")]
    InvalidSpec(String),

    #[error("parameter mismatch: {0}")]
    Params(String),
}
