//! Divisor-method apportionment with guaranteed seats.
//!
//! The crate covers the sequential divisor procedure (exact and fast float
//! paths), detection and attribution of quota violations, the τ skewness
//! statistic for three-state populations and the limiting behaviour along
//! τ-lines, closed-form thresholds, analytic violation probabilities, and a
//! Monte Carlo harness to check them.

pub mod engine;
pub mod error;
pub mod method;
pub mod montecarlo;
pub mod population;
pub mod probability;
pub mod quadrature;
pub mod report;
pub mod tau;
pub mod thresholds;
pub mod verify;
pub mod violation;

pub use engine::{apportion, modified_apportion, Apportionment, SeatAward};
pub use error::{Error, Result};
pub use method::Method;
pub use montecarlo::{EstimateResult, SamplerKind, SamplerSpec};
pub use population::{parse_decimal, standard_quotas, PopulationInstance, QuotaVector};
pub use probability::{DensitySpec, ProbabilityResult};
pub use tau::{TauValue, ViolatorySet};
pub use thresholds::ThresholdSet;
pub use violation::{
    classify_violation, classify_violation_f64, criteria_test, QuotaCheck, ViolationCause,
    ViolationReport, ViolationStatus,
};
