use thiserror::Error;

/// Errors raised by estimation, fitting and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("observation {index} is {value}, expected a positive finite number")]
    NonPositiveObservation { index: usize, value: f64 },

    #[error("a group needs at least 2 observations, got {n}")]
    TooFewObservations { n: usize },

    #[error("at least {min} groups are required, got {k}")]
    TooFewGroups { k: usize, min: usize },

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("sample variance on the log scale is zero; the test is undefined")]
    DegenerateSample,

    #[error("variance parameter must be positive, got {0}")]
    NonPositiveVariance(f64),

    #[error("profile variance collapses to zero (S^2 = 0 and ybar = eta)")]
    DegenerateProfile,

    #[error("restricted fit did not converge: {reason}")]
    NoConvergence { reason: String, iterations: usize },

    #[error("alpha = {0} is outside the admissible range")]
    AlphaOutOfRange(f64),

    #[error("at least {min} replicates are required, got {m}")]
    MTooSmall { m: usize, min: usize },

    #[error(
        "likelihood ratio statistic is negative ({0:e}); the restricted optimum beat the unrestricted one"
    )]
    InconsistentLikelihood(f64),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{failures} of {reps} experiments failed for {method}, more than 1%")]
    TooManyFailures {
        method: String,
        failures: usize,
        reps: usize,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::InconsistentLikelihood(_) | Error::TooManyFailures { .. }
        )
    }
}
