use thiserror::Error;

/// Errors raised by the numerical kernels and verification drivers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// The result would overflow the scalar type.
    #[error("range error in {op}: argument {arg} exceeds overflow threshold {threshold}")]
    Range {
        op: &'static str,
        arg: f64,
        threshold: f64,
    },

    /// A caller-side precondition does not hold (e.g. a breakpoint inside the guard band).
    #[error("precondition violated in {op}: {reason}")]
    Precondition { op: &'static str, reason: String },

    /// A series or iteration failed to converge.
    #[error("convergence failure in {branch}: {reason}")]
    Convergence { branch: &'static str, reason: String },

    /// The adaptive integrator ran out of budget before reaching the tolerance.
    #[error("accuracy not reached after {subdivisions} subdivisions: value {value:e}, error estimate {err_est:e}")]
    Accuracy {
        value: f64,
        err_est: f64,
        subdivisions: usize,
    },

    /// The integrand produced a NaN or infinity.
    #[error("integrand returned a non-finite value {value} at x = {x:e}")]
    Integrand { x: f64, value: f64 },

    /// A principal-value sequence does not settle.
    #[error("principal value diverges; J_eps table: {table:?}")]
    Divergence { table: Vec<(f64, f64)> },

    /// Root bracketing found no sign change where one was expected.
    #[error("bracketing failure: {reason}; sampled sign table: {table:?}")]
    Bracketing {
        reason: String,
        table: Vec<(f64, f64)>,
    },
}

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn precondition(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Precondition {
            op,
            reason: reason.into(),
        }
    }

    /// True for errors caused by the caller's input rather than by numerics.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Precondition { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
