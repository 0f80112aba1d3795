use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected {expected} spins, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("invalid spin label {0:?} (use ↑/↓, u/d or 1/0)")]
    InvalidSpin(char),

    #[error("site {site} out of range for a register of {n} spins")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("duplicate site {0} in embedding")]
    DuplicateSite(usize),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("matrix dimension {got} does not match 2^{n_spins}")]
    BadDimension { n_spins: usize, got: usize },

    #[error("invalid spin pair ({0}, {1})")]
    InvalidPair(usize, usize),

    #[error("cannot parse gate {0:?}: {1}")]
    GateParse(String, String),

    #[error("parameter count mismatch: template has {expected} free parameters, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("invalid lattice configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
