use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// `|1 + p^n cos(m pi)|` too small to normalize the superposition.
    #[error("singular normalization: |1 + p^{n} cos(m pi)| = {value:e} (n = {n}, p = {p})")]
    SingularNormalization { n: usize, p: f64, value: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("size limit exceeded: {what} = {got} (max {max})")]
    SizeLimit { what: &'static str, got: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical invariant that must hold by construction was violated.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
