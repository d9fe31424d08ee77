use thiserror::Error;

/// Errors produced by the billiard kernel.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid input: off-boundary points, bad scene data, out-of-range
    /// parameters, malformed codings.
    #[error("domain error: {0}")]
    Domain(String),

    /// Near-tangent collision; the curvature recursion divides by cos(phi).
    #[error("grazing collision at bounce {bounce}: |<v, nu>| = {dot:.3e}")]
    Grazing { bounce: usize, dot: f64 },

    /// A trajectory left the scene before completing the requested bounces.
    #[error("trajectory escaped at bounce {bounce}")]
    Escape { bounce: usize },

    /// The periodic orbit solver did not reach the residual target.
    #[error("orbit solver stalled after {iterations} iterations, residual {residual:.3e}")]
    Solver { iterations: usize, residual: f64 },

    /// The independent perturbation oracle lost its reference coding.
    #[error("oracle failed at bounce {bounce}: {reason}")]
    Oracle { bounce: usize, reason: String },

    /// Violated internal invariant; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}
