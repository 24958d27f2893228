//! Crate-wide error type.

/// Errors surfaced by set operations, solvers and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operand dimensions do not agree.
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    /// An input contained NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The template cannot cover the disturbance image: the under chain
    /// terminates empty. A typed outcome, not a crash.
    #[error("empty under-approximation: {0}")]
    EmptyUnderApprox(String),

    /// A feasibility LP certified the queried state infeasible.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Exact volume would enumerate more column subsets than the cap allows.
    #[error("volume enumeration too large: C({n_gens},{dim}) = {combinations} exceeds cap {cap}")]
    VolumeTooLarge {
        n_gens: usize,
        dim: usize,
        combinations: u64,
        cap: u64,
    },

    /// The backend could not certify any solution status.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// Problem-file schema violation (bad field, inconsistent dimensions, ...).
    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
