use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {index} = {value} is outside the copula domain (0, 1]")]
    Domain { index: usize, value: f64 },

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("party {0} is not part of the model")]
    UnknownParty(usize),

    #[error("party {0} has already defaulted")]
    PartyDefaulted(usize),

    #[error("party {0} is in the survival set but the scenario records its default")]
    SurvivalContradiction(usize),

    #[error("inconsistent scenario: {0}")]
    Scenario(String),

    #[error("{count} parties outside the survival set exceeds the supported maximum of {max}")]
    TooManyContagionParties { count: usize, max: usize },

    #[error("time {0} must be non-negative")]
    NegativeTime(f64),

    #[error("horizon {end} precedes the current time {start}")]
    TimeOrder { start: f64, end: f64 },

    #[error("annuity is zero; the par spread is undefined")]
    ZeroAnnuity,

    #[error("ODE step-halving check failed: |V(h) - V(h/2)| = {difference:e} exceeds {tolerance:e}")]
    StepSize { difference: f64, tolerance: f64 },

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("non-finite Monte Carlo weight on path {path}")]
    NonFiniteWeight { path: u64 },

    #[error("conditioning event was hit by only {hits} of {paths} paths")]
    InsufficientPaths { hits: u64, paths: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
