use thiserror::Error;

/// Failures raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error(
        "quadrature did not converge within {subdivisions} subdivisions (value {value:e}, error estimate {err:e})"
    )]
    NonConvergent { subdivisions: usize, value: f64, err: f64 },

    #[error("integrand returned non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("{0} requires the zero-count Poisson term to be included")]
    UnsupportedMode(&'static str),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("angle map is singular: {0}")]
    Singularity(String),

    #[error("argument {value} is outside the domain of {function}")]
    OutOfDomain { function: &'static str, value: f64 },

    #[error("{outside} of {total} samples fall outside the histogram range")]
    InsufficientCoverage { outside: usize, total: usize },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParams {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
