//! Error types shared across the solver library.

/// Errors produced by problem construction, grid setup, and time marching.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    /// Invalid problem data: inconsistent flux splitting, malformed
    /// diffusion breakpoints, datum outside the grid window, non-nested
    /// grids, and similar.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid user input (unknown preset id, malformed CLI values).
    #[error("usage error: {0}")]
    Usage(String),

    /// Non-finite values appeared during time marching.
    #[error("numeric failure at step {step} (t = {t}): {msg}")]
    Numeric { step: usize, t: f64, msg: String },

    /// Nonzero density reached the edge of the truncated window; results
    /// past this point would silently lose mass.
    #[error("domain too small: support reached the window edge at step {step} (t = {t})")]
    DomainTooSmall { step: usize, t: f64 },

    /// An API precondition was violated (e.g. the entropy residual was
    /// asked to audit a pair of states that are not one step apart).
    #[error("misuse: {0}")]
    Misuse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
