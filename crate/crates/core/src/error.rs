use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("lattice tail bound {tail:e} exceeds tolerance {allowed:e} at cutoff shell {max_shell}")]
    TailNotConverged { tail: f64, allowed: f64, max_shell: u64 },

    #[error("could not bracket the effective chemical potential: {0}")]
    BracketNotFound(String),

    #[error("surface minimizer touches the box boundary at ({x}, {y})")]
    BoxTooSmall { x: f64, y: f64 },

    #[error("difference quotients {lower} > {upper}: input is not concave")]
    ConcavityViolated { lower: f64, upper: f64 },

    #[error("Fock basis dimension {dimension} exceeds cap {cap}")]
    DimensionTooLarge { dimension: usize, cap: usize },

    #[error("mode {0:?} is not part of the basis")]
    UnknownMode([i32; 3]),

    #[error("coherent state truncation error {0:e} above 1%")]
    TruncationUnfaithful(f64),

    #[error("quadrature mass {mass} deviates from 1 by more than {tol:e}")]
    QuadratureNotConverged { mass: f64, tol: f64 },

    #[error("operators live on different bases")]
    BasisMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not a density matrix: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
