use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The variants split into two families: input problems (`Domain`,
/// `InvalidParameter`, `Unsupported`) and numerical failures (everything
/// else). [`Error::is_numeric`] tells them apart, which the CLI uses to pick
/// an exit status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },

    #[error("series diverges for argument {argument}")]
    Divergent { argument: f64 },

    #[error("quadrature tolerance not met: estimated error {error:.3e} on value {value:.6e}")]
    ToleranceNotMet { value: f64, error: f64 },

    #[error("non-finite integrand sample at t = {at}")]
    NonFinite { at: f64 },

    #[error("overflow: {0}")]
    Overflow(String),
}

impl Error {
    pub fn is_numeric(&self) -> bool {
        !matches!(
            self,
            Error::Domain(_) | Error::InvalidParameter(_) | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
