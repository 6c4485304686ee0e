use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The dependence exponent kappa = alpha0/alpha is >= 1, where the
    /// HC machinery is undefined.
    #[error("degenerate regime (kappa >= 1): {0}")]
    DegenerateRegime(String),
    /// A size or runtime cap was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    /// Internal numerical failure that indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
