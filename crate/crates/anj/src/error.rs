//! Error taxonomy shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// `Domain` and `Usage` mean the caller handed us something invalid;
/// everything else reports a failure of the numerics themselves.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative scheme failed to reach the requested tolerance.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A quantity that must stay finite left the representable range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// The Markov chain has an absorbing or unreachable state.
    #[error("reducible chain: {0}")]
    ReducibleChain(String),

    /// Linear algebra broke down (singular or ill-conditioned system).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A solution violated a structural property it must satisfy.
    #[error("consistency violation: {0}")]
    Consistency(String),

    /// Parameters put the model in a regime where the quantity is undefined.
    #[error("degenerate regime: {0}")]
    DegenerateRegime(String),

    /// Malformed request (empty grid, zero blocks, bad config, ...).
    #[error("usage error: {0}")]
    Usage(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
