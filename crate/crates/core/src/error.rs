use thiserror::Error;

use crate::method::Method;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid population {0:?}: expected a positive decimal")]
    InvalidPopulation(String),

    #[error("populations must be pairwise distinct (states {0} and {1} are equal)")]
    DuplicatePopulation(usize, usize),

    #[error("need at least {min} states, got {got}")]
    TooFewStates { min: usize, got: usize },

    #[error("{seats} seats cannot cover {states} states")]
    TooFewSeats { seats: u32, states: usize },

    /// Two states reached the same priority value and the outcome depends on
    /// which one is served first.
    #[error("priority tie between states {states:?}")]
    TieDetected { states: Vec<usize> },

    #[error("method {method} is not supported here: {reason}")]
    UnsupportedMethod {
        method: Method,
        reason: &'static str,
    },

    #[error("apportionment has both upper and lower quota violations")]
    MixedViolation,

    #[error("tau {0} is outside (-1/3, 1/3)")]
    TauOutOfRange(f64),

    #[error("point lies outside the wedge 1 < x < y")]
    OutOfWedge,

    #[error("value {value} outside the admissible range {range}")]
    OutOfRange { value: f64, range: String },

    #[error(
        "tau {0} is exceptional: a limiting quota is an integer or a limiting priority tie occurs"
    )]
    ExceptionalTau(f64),

    #[error("tau {0} is ultimately violatory; the non-violatory threshold is undefined")]
    ViolatoryTau(f64),

    #[error("no stabilization found below x = 2^{0}")]
    NoStabilization(u32),

    #[error("density {0} has no pointwise form here; use exact_probability")]
    UnsupportedDensity(&'static str),

    #[error("at least one sample is required")]
    InsufficientSamples,

    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
}

pub type Result<T> = std::result::Result<T, Error>;
