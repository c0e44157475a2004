use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// The variants split into two families: input/precondition problems
/// ([`Error::is_usage`] returns true) and numerical failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty interval set")]
    EmptySet,

    #[error("invalid interval [{a}, {b}]: left end must be strictly below right end")]
    InvalidBand { a: f64, b: f64 },

    #[error("cannot parse interval set spec {spec:?}: {reason}")]
    Parse { spec: String, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point {x} is not in the interior of the set")]
    NotInterior { x: f64 },

    #[error("point {x} is not in the set")]
    NotInSet { x: f64 },

    #[error("alpha = {alpha} is an even integer; the rate constant is degenerate")]
    EvenIntegerAlpha { alpha: f64 },

    #[error("linear system is singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },

    #[error("quadrature did not converge: {context}")]
    Quadrature { context: String },

    #[error("evaluation point is within {distance:.3e} of the endpoint {endpoint}")]
    NearEndpoint { endpoint: f64, distance: f64 },

    #[error("square-root branch tracking failed near {at}")]
    BranchTracking { at: String },

    #[error("exchange did not converge after {iterations} iterations (ratio - 1 = {excess:.3e})")]
    RemezCycling { iterations: usize, excess: f64 },

    #[error("ill-conditioned reference: {reason}")]
    IllConditioned { reason: String },

    #[error("degenerate extrapolation fit: {reason}")]
    DegenerateFit { reason: String },

    #[error("monotonicity violated: {context}")]
    Monotonicity { context: String },

    #[error("proved bound violated: {context}")]
    BoundViolation { context: String },
}

impl Error {
    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::EmptySet
                | Error::InvalidBand { .. }
                | Error::Parse { .. }
                | Error::InvalidParameter { .. }
                | Error::NotInterior { .. }
                | Error::NotInSet { .. }
                | Error::EvenIntegerAlpha { .. }
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
