use thiserror::Error;

/// Errors raised by the fragmentation toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operation not supported for {law}: {reason}")]
    Unsupported { law: String, reason: String },

    #[error("the fragmentation state is finished; every interval is at or below the cutoff")]
    Finished,

    #[error("no root of {what} in [{lo}, {hi}]")]
    Bracketing {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("{what} is not monotone on the search bracket; uniqueness cannot be assumed")]
    NotMonotone { what: &'static str },

    #[error("linear system is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error(
        "grid too coarse: Richardson error estimate {estimate:e} exceeds tolerance {tolerance:e}"
    )]
    GridTooCoarse { estimate: f64, tolerance: f64 },

    #[error("quadrature failed to converge on [{a}, {b}] (error estimate {error:e})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("empty sample: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
