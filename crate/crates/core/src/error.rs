use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {re}{im:+}i lies outside the weight's domain")]
    OutsideDomain { re: f64, im: f64 },

    #[error("invalid weight specification: {0}")]
    InvalidWeight(String),

    #[error("quadrature did not converge: {what} (estimated error {error:.3e}, tolerance {tolerance:.3e})")]
    NonConvergence {
        what: String,
        error: f64,
        tolerance: f64,
    },

    #[error("moment matrix is not positive definite: leading minor {minor} has pivot {pivot:.3e}")]
    NotPositiveDefinite { minor: usize, pivot: f64 },

    #[error("moment matrix condition indicator {indicator:.3e} exceeds {limit:.1e}; lower max_degree")]
    IllConditioned { indicator: f64, limit: f64 },

    #[error("orthogonal system has max degree {available}, but degree {required} is needed")]
    InsufficientDepth { required: usize, available: usize },

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("variables {first} and {second} of `{list}` are degenerate (distance {distance:.3e}); declare a confluent group")]
    DegenerateVariables {
        list: &'static str,
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("singular {what} determinant (pivot ratio {conditioning:.3e})")]
    SingularDeterminant { what: &'static str, conditioning: f64 },

    #[error("non-finite result in {0}")]
    NonFinite(&'static str),

    #[error("Monte Carlo variance blow-up: {0}")]
    VarianceBlowUp(String),

    #[error("oracle method {method} does not support N = {n}")]
    OracleLimit { method: &'static str, n: usize },
}

impl Error {
    /// True for errors caused by violated preconditions of the caller's query
    /// rather than by numerical failure.
    pub fn is_constraint(&self) -> bool {
        matches!(
            self,
            Error::Constraint(_)
                | Error::DegenerateVariables { .. }
                | Error::InsufficientDepth { .. }
                | Error::OutsideDomain { .. }
                | Error::OracleLimit { .. }
                | Error::InvalidWeight(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
