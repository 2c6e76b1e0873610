//! Quota-violation detection and cause classification.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::engine::{allocate, allocate_modified, Arith, Exact, Float, Stop};
use crate::error::{Error, Result};
use crate::method::Method;
use crate::population::{exact_from_f64, PopulationInstance, QuotaVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationStatus {
    None,
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCause {
    /// No violation, so there is nothing to attribute.
    NotApplicable,
    /// The violation is not explained by the smallest state's guaranteed
    /// seat: the method has no guarantee, or Ã disagrees with A.
    Intrinsic,
    /// A violates quota, Ã = A, and A without the smallest state on M seats
    /// is within quota.
    CausedByNonzero,
    /// A violates quota and Ã = A, but A without the smallest state already
    /// violates quota on M seats.
    CausedOrWorsenedByNonzero,
}

impl ViolationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationStatus::None => "none",
            ViolationStatus::Lower => "lower",
            ViolationStatus::Upper => "upper",
        }
    }
}

impl ViolationCause {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCause::NotApplicable => "not-applicable",
            ViolationCause::Intrinsic => "intrinsic",
            ViolationCause::CausedByNonzero => "caused-by-nonzero",
            ViolationCause::CausedOrWorsenedByNonzero => "caused-or-worsened-by-nonzero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub status: ViolationStatus,
    /// States (in the caller's order) outside their quota bounds.
    #[serde(rename = "states")]
    pub offending_states: Vec<usize>,
    pub cause: ViolationCause,
}

impl ViolationReport {
    pub fn is_caused_by_nonzero(&self) -> bool {
        self.cause == ViolationCause::CausedByNonzero
    }
}

/// States below their lower quota and above their upper quota.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuotaCheck {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

impl QuotaCheck {
    pub fn from_bounds(seats: &[u32], bounds: &[(u64, u64)]) -> Self {
        let mut check = QuotaCheck::default();
        for (i, (&a, &(lo, hi))) in seats.iter().zip(bounds).enumerate() {
            let a = a as u64;
            if a < lo {
                check.lower.push(i);
            } else if a > hi {
                check.upper.push(i);
            }
        }
        check
    }

    pub fn new(seats: &[u32], quotas: &QuotaVector) -> Self {
        let bounds: Vec<_> = quotas.floors().into_iter().zip(quotas.ceilings()).collect();
        Self::from_bounds(seats, &bounds)
    }

    pub fn is_violation(&self) -> bool {
        !self.lower.is_empty() || !self.upper.is_empty()
    }
}

/// Classification over ascending states, before mapping back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Classified {
    pub seats: Vec<u32>,
    pub check: QuotaCheck,
    pub cause: ViolationCause,
}

pub(crate) fn classify_ascending<A: Arith>(
    method: Method,
    pops: &[A::Pop],
    house: u32,
) -> std::result::Result<Classified, Stop> {
    let alloc = allocate::<A>(method, pops, house)?;
    let bounds = A::quota_bounds(pops, house).ok_or(Stop::Ambiguous)?;
    let check = QuotaCheck::from_bounds(&alloc.seats, &bounds);

    let cause = if !check.is_violation() {
        ViolationCause::NotApplicable
    } else if !method.guarantees_nonzero()
        || allocate_modified::<A>(method, pops, house)?.seats != alloc.seats
    {
        ViolationCause::Intrinsic
    } else {
        let rest = &pops[1..];
        let sub = allocate::<A>(method, rest, house).map_err(Stop::shifted)?;
        let sub_bounds = A::quota_bounds(rest, house).ok_or(Stop::Ambiguous)?;
        if QuotaCheck::from_bounds(&sub.seats, &sub_bounds).is_violation() {
            ViolationCause::CausedOrWorsenedByNonzero
        } else {
            ViolationCause::CausedByNonzero
        }
    };
    Ok(Classified {
        seats: alloc.seats,
        check,
        cause,
    })
}

fn into_report(c: Classified, perm: &[usize]) -> Result<ViolationReport> {
    let status = match (c.check.lower.is_empty(), c.check.upper.is_empty()) {
        (true, true) => ViolationStatus::None,
        (false, true) => ViolationStatus::Lower,
        (true, false) => ViolationStatus::Upper,
        (false, false) => return Err(Error::MixedViolation),
    };
    let mut offending: Vec<usize> = c
        .check
        .lower
        .iter()
        .chain(&c.check.upper)
        .map(|&i| perm[i])
        .collect();
    offending.sort_unstable();
    Ok(ViolationReport {
        status,
        offending_states: offending,
        cause: c.cause,
    })
}

fn map_tie(stop: Stop, perm: &[usize]) -> Error {
    match stop {
        Stop::Tie(states) => Error::TieDetected {
            states: states.iter().map(|&s| perm[s]).collect(),
        },
        other => other.into_error(),
    }
}

/// Compares A with the quota bounds and, when it violates quota, attributes
/// the violation. States are sorted ascending before Ã and the reduced
/// apportionment are formed; reported states use the caller's order.
///
/// The cause taxonomy is validated for three states; for n > 3 it follows
/// the same definition but should be treated as experimental.
pub fn classify_violation(method: Method, inst: &PopulationInstance) -> Result<ViolationReport> {
    let perm = inst.ascending_order();
    let sorted: Vec<BigRational> = perm
        .iter()
        .map(|&i| inst.populations()[i].clone())
        .collect();
    let pops = Exact::pops(&sorted);
    let c =
        classify_ascending::<Exact>(method, &pops, inst.seats()).map_err(|s| map_tie(s, &perm))?;
    into_report(c, &perm)
}

/// Double-precision classification with automatic escalation to exact
/// arithmetic when a priority comparison or a quota floor is too close to
/// call.
pub fn classify_violation_f64(method: Method, pops: &[f64], seats: u32) -> Result<ViolationReport> {
    let mut perm: Vec<usize> = (0..pops.len()).collect();
    perm.sort_by(|&a, &b| pops[a].total_cmp(&pops[b]));
    let sorted: Vec<f64> = perm.iter().map(|&i| pops[i]).collect();
    if sorted.len() < 2 || (seats as usize) < sorted.len() {
        return PopulationInstance::from_f64(pops, seats)
            .and_then(|i| classify_violation(method, &i));
    }
    if let Some(w) = sorted.windows(2).position(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePopulation(perm[w], perm[w + 1]));
    }
    if !sorted.iter().all(|p| p.is_finite() && *p > 0.0) {
        return Err(Error::InvalidPopulation(format!("{pops:?}")));
    }
    match classify_ascending::<Float>(method, &sorted, seats) {
        Ok(c) => into_report(c, &perm),
        Err(Stop::Ambiguous) => {
            let exact: Vec<BigRational> =
                sorted.iter().map(|&p| exact_from_f64(p).unwrap()).collect();
            let c = classify_ascending::<Exact>(method, &Exact::pops(&exact), seats)
                .map_err(|s| map_tie(s, &perm))?;
            into_report(c, &perm)
        }
        Err(stop) => Err(map_tie(stop, &perm)),
    }
}

/// The three-state lower-quota-violation criteria test.
///
/// With ascending quotas q₁ < q₂ < q₃, a lower violation occurs iff
/// q₃·δ(⌊q₁⌋) < q₁·δ(⌊q₃⌋−1), q₃·δ(⌊q₂⌋) < q₂·δ(⌊q₃⌋−1) and
/// ⌈q₁⌉ + ⌈q₂⌉ + ⌊q₃⌋ = M + 1. Holds for the five methods with δ(0) = 0.
pub fn criteria_test(method: Method, quotas: &QuotaVector, seats: u32) -> Result<bool> {
    method.require_guarantee("the criteria test needs δ(0) = 0")?;
    let q = quotas.quotas();
    if q.len() != 3 {
        return Err(Error::TooFewStates {
            min: 3,
            got: q.len(),
        });
    }
    if !(q[0] < q[1] && q[1] < q[2]) {
        return Err(Error::OutOfRange {
            value: f64::NAN,
            range: "ascending quotas".into(),
        });
    }
    let floors = quotas.floors();
    let ceils = quotas.ceilings();
    if floors[2] == 0 {
        return Ok(false);
    }
    let top = (floors[2] - 1) as u32;
    // q₃·δ(a) < qᵢ·δ(b) with everything nonnegative ⇔ q₃²·δ(a)² < qᵢ²·δ(b)²
    let less = |qi: &BigRational, a: u32| {
        let da = method.divisor_squared(a);
        let db = method.divisor_squared(top);
        let lhs = &q[2] * &q[2] * BigRational::new(BigInt::from(da.num), BigInt::from(da.den));
        let rhs = qi * qi * BigRational::new(BigInt::from(db.num), BigInt::from(db.den));
        lhs < rhs
    };
    let first = less(&q[0], floors[0] as u32);
    let second = less(&q[1], floors[1] as u32);
    let third = ceils[0] + ceils[1] + floors[2] == seats as u64 + 1;
    Ok(first && second && third)
}
