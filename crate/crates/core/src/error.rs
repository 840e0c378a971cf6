use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("hurst must be in [0.5, 0.75], got {0}")]
    HurstOutOfRange(f64),

    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {estimate:e})")]
    QuadratureFailed { tolerance: f64, estimate: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("grid or parameter mismatch: {0}")]
    Mismatch(&'static str),

    #[error("degenerate path: integral of X^2 is {0:e}")]
    DegeneratePath(f64),

    #[error("statistic denominator {0:e} is too close to zero")]
    NearZeroDenominator(f64),

    #[error("matrix is not positive semidefinite (pivot {pivot}, value {value:e})")]
    NotPositiveSemidefinite { pivot: usize, value: f64 },

    #[error("sample is empty")]
    EmptySample,

    #[error("sample contains a non-finite value")]
    NonFiniteSample,

    #[error("singular fit: {0}")]
    SingularFit(&'static str),

    #[error("{failed} of {total} replications were degenerate")]
    TooManyFailures { failed: usize, total: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, requirement: &'static str, value: f64) -> Self {
        Error::InvalidParameter {
            name,
            requirement,
            value,
        }
    }

    /// True for errors that flag a single unlucky replication rather than a
    /// broken configuration.
    pub fn is_degenerate_sample(&self) -> bool {
        matches!(self, Error::DegeneratePath(_) | Error::NearZeroDenominator(_))
    }
}
