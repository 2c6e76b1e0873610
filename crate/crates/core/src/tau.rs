//! The τ skewness statistic for three states and the limiting behaviour of
//! apportionments along τ-lines.
//!
//! A reduced vector (1, x, y) with 1 < x < y has
//! τ = (mean − median)/max = (1 − 2x + y)/(3y) ∈ (−1/3, 1/3). Fixing τ gives
//! the line y = (2x − 1)/(1 − 3τ); as x → ∞ along it the standard quotas of
//! the two large states tend to q̃₂ = M(1 − 3τ)/(3 − 3τ) and
//! q̃₃ = 2M/(3 − 3τ), and the apportionment settles on Ã(q̃₂, q̃₃).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::engine::{allocate, Exact, Stop};
use crate::error::{Error, Result};
use crate::method::Method;
use crate::population::{exact_from_f64, floor_u64, quotas_of};

const THIRD: f64 = 1.0 / 3.0;

/// A τ value strictly inside (−1/3, 1/3).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TauValue(f64);

impl TauValue {
    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_finite() && tau.abs() < THIRD {
            Ok(TauValue(tau))
        } else {
            Err(Error::TauOutOfRange(tau))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// τ as an exact rational (the f64 value, not a decimal approximation).
    pub fn exact(self) -> BigRational {
        exact_from_f64(self.0).expect("finite by construction")
    }
}

impl TryFrom<f64> for TauValue {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        TauValue::new(v)
    }
}

impl From<TauValue> for f64 {
    fn from(t: TauValue) -> f64 {
        t.0
    }
}

impl fmt::Display for TauValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn sorted_triple(p: [f64; 3]) -> Result<[f64; 3]> {
    let mut s = p;
    s.sort_by(f64::total_cmp);
    if !s.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::InvalidPopulation(format!("{p:?}")));
    }
    if s[0] == s[1] {
        return Err(Error::DuplicatePopulation(0, 1));
    }
    if s[1] == s[2] {
        return Err(Error::DuplicatePopulation(1, 2));
    }
    Ok(s)
}

/// τ of three distinct positive populations, in any order.
pub fn tau_of(populations: [f64; 3]) -> Result<TauValue> {
    let [a, b, c] = sorted_triple(populations)?;
    let mean = (a + b + c) / 3.0;
    TauValue::new((mean - b) / c)
}

/// τ in exact arithmetic; equals (1 − 2x + y)/(3y) on the reduced vector.
pub fn tau_of_exact(populations: &[BigRational; 3]) -> Result<BigRational> {
    let mut s = populations.clone();
    s.sort();
    if !s.iter().all(|p| p > &BigRational::zero()) {
        return Err(Error::InvalidPopulation("nonpositive".into()));
    }
    if s[0] == s[1] || s[1] == s[2] {
        return Err(Error::DuplicatePopulation(0, 1));
    }
    let three = BigRational::from_integer(BigInt::from(3));
    let mean = (&s[0] + &s[1] + &s[2]) / &three;
    Ok((mean - &s[1]) / &s[2])
}

/// y on the τ-line through x: (2x − 1)/(1 − 3τ).
pub fn y_on_line(x: f64, tau: TauValue) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::OutOfWedge);
    }
    let y = (2.0 * x - 1.0) / (1.0 - 3.0 * tau.0);
    if y > x {
        Ok(y)
    } else {
        Err(Error::OutOfWedge)
    }
}

/// x on the τ-line through y: y/2 − 3τy/2 + 1/2.
pub fn x_on_line(y: f64, tau: TauValue) -> Result<f64> {
    let x = 0.5 * y - 1.5 * tau.0 * y + 0.5;
    if x > 1.0 && x < y {
        Ok(x)
    } else {
        Err(Error::OutOfWedge)
    }
}

/// Smallest y for which (1, x(y, τ), y) lies inside the wedge 1 < x < y.
pub fn wedge_entry(tau: TauValue) -> f64 {
    let t = tau.0;
    (1.0 / (1.0 - 3.0 * t)).max(1.0 / (1.0 + 3.0 * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitingQuotas {
    pub q2: f64,
    pub q3: f64,
    /// A limiting quota is (numerically) an integer.
    pub exceptional: bool,
}

const INTEGER_TOLERANCE: f64 = 1e-9;

fn near_integer(v: f64) -> bool {
    (v - v.round()).abs() < INTEGER_TOLERANCE
}

/// (q̃₂, q̃₃) = (M(1 − 3τ)/(3 − 3τ), 2M/(3 − 3τ)).
pub fn limiting_quotas(tau: TauValue, seats: u32) -> LimitingQuotas {
    let m = seats as f64;
    let t = tau.0;
    let q3 = 2.0 * m / (3.0 - 3.0 * t);
    let q2 = m * (1.0 - 3.0 * t) / (3.0 - 3.0 * t);
    LimitingQuotas {
        q2,
        q3,
        exceptional: near_integer(q3) || near_integer(q2),
    }
}

/// Inverse of τ ↦ q̃₃: τ = 1 − 2M/(3q̃₃), for q̃₃ ∈ (M/2, M).
pub fn tau_from_q3(q3: f64, seats: u32) -> Result<TauValue> {
    let m = seats as f64;
    if !(q3 > m / 2.0 && q3 < m) {
        return Err(Error::OutOfRange {
            value: q3,
            range: format!("({}, {})", m / 2.0, m),
        });
    }
    TauValue::new(1.0 - 2.0 * m / (3.0 * q3))
}

/// D(k) = ((M−k)δ(k−1) − kδ(M−k−1)) / (δ(k−1) + δ(M−k−1)), unclamped.
///
/// For ⌊q̃₃⌋ = k the two-state limit violates lower quota exactly when the
/// fractional part of q̃₃ is below D(k). Negative values mean no violation
/// interval.
pub fn d_star(method: Method, seats: u32, k: u32) -> Result<f64> {
    if k < 1 || k + 1 > seats {
        return Err(Error::OutOfRange {
            value: k as f64,
            range: format!("[1, {}]", seats.saturating_sub(1)),
        });
    }
    let m = seats as f64;
    let kf = k as f64;
    let a = method.divisor(k - 1);
    let b = method.divisor(seats - k - 1);
    Ok(((m - kf) * a - kf * b) / (a + b))
}

/// D(k) clamped to [0, 1], the length of the violating fractional range.
pub fn d_star_clamped(method: Method, seats: u32, k: u32) -> Result<f64> {
    Ok(d_star(method, seats, k)?.clamp(0.0, 1.0))
}

/// Which third of the fractional range [0, 1) a two-state limit falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DInterval {
    /// (⌈q̃₂⌉, ⌊q̃₃⌋) with state 3 served last: Ã violates lower quota.
    I1,
    /// (⌈q̃₂⌉, ⌊q̃₃⌋) with state 2 served last: no violation.
    I2,
    /// (⌊q̃₂⌋, ⌈q̃₃⌉): no violation.
    I3,
}

/// M seats shared by two states with quotas (M − k − d, k + d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoStateOutcome {
    pub a2: u32,
    pub a3: u32,
    /// 2 or 3: the state that received the final seat.
    pub last: u8,
}

impl TwoStateOutcome {
    pub fn interval(&self, seats: u32, k: u32) -> Option<DInterval> {
        match (self.a2, self.a3, self.last) {
            (a2, a3, 3) if a2 == seats - k && a3 == k => Some(DInterval::I1),
            (a2, a3, 2) if a2 == seats - k && a3 == k => Some(DInterval::I2),
            (a2, a3, _) if a2 + 1 == seats - k && a3 == k + 1 => Some(DInterval::I3),
            _ => None,
        }
    }
}

/// Runs the two-state divisor procedure for M seats on (M − k − d, k + d)
/// in exact arithmetic.
pub fn two_state_outcome(method: Method, seats: u32, k: u32, d: f64) -> Result<TwoStateOutcome> {
    if !(0.0..1.0).contains(&d) || k < 1 || k >= seats {
        return Err(Error::OutOfRange {
            value: d,
            range: "[0, 1)".into(),
        });
    }
    let d = exact_from_f64(d).ok_or(Error::OutOfWedge)?;
    let q3 = BigRational::from_integer(BigInt::from(k)) + &d;
    let q2 = BigRational::from_integer(BigInt::from(seats - k)) - &d;
    let alloc =
        allocate::<Exact>(method, &Exact::pops(&[q2, q3]), seats).map_err(Stop::into_error)?;
    let last = alloc.order.last().map(|a| a.state as u8 + 2).unwrap_or(2);
    Ok(TwoStateOutcome {
        a2: alloc.seats[0],
        a3: alloc.seats[1],
        last,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalDecomposition {
    pub k: u32,
    pub d_star_raw: f64,
    /// max(D(k), 0), capped at 1.
    pub d_star: f64,
    /// Where the two-state limit switches to (⌊q̃₂⌋, ⌈q̃₃⌉).
    pub d_double_star: f64,
}

const BISECTION_TOLERANCE: f64 = 1e-10;

/// Splits [0, 1) into I₁ = [0, d*), I₂ = [d*, d**), I₃ = [d**, 1) for
/// ⌊q̃₃⌋ = k. d* is closed form; d** is located by bisection on the
/// two-state engine.
pub fn interval_decomposition(method: Method, seats: u32, k: u32) -> Result<IntervalDecomposition> {
    method.require_guarantee("the interval decomposition needs δ(0) = 0")?;
    let lo_k = seats.div_ceil(2);
    if k < lo_k || k + 1 > seats {
        return Err(Error::OutOfRange {
            value: k as f64,
            range: format!("[{lo_k}, {}]", seats - 1),
        });
    }
    let raw = d_star(method, seats, k)?;
    let ds = raw.clamp(0.0, 1.0);

    let in_i3 = |d: f64| -> bool {
        match two_state_outcome(method, seats, k, d) {
            Ok(o) => o.interval(seats, k) == Some(DInterval::I3),
            // an exact tie sits on a boundary; count it with the upper side
            Err(_) => true,
        }
    };

    let top = 1.0 - BISECTION_TOLERANCE;
    let dss = if ds >= top || !in_i3(top) {
        1.0
    } else if in_i3(ds) {
        ds
    } else {
        let (mut lo, mut hi) = (ds, top);
        while hi - lo > BISECTION_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if in_i3(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(IntervalDecomposition {
        k,
        d_star_raw: raw,
        d_star: ds,
        d_double_star: dss,
    })
}

/// Whether A(1, x, y(x, τ)) is a lower violation caused by the guaranteed
/// seat for all large x: k = ⌊q̃₃⌋ ∈ [⌈M/2⌉, M−1] and q̃₃ − k < D(k).
pub fn is_ultimately_violatory(method: Method, seats: u32, tau: TauValue) -> Result<bool> {
    method.require_guarantee("ultimate violation is defined for methods with δ(0) = 0")?;
    let lim = limiting_quotas(tau, seats);
    if lim.exceptional {
        return Err(Error::ExceptionalTau(tau.get()));
    }
    let k = lim.q3.floor() as u32;
    if k < seats.div_ceil(2) || k + 1 > seats {
        return Ok(false);
    }
    let d = lim.q3 - f64::from(k);
    Ok(d < d_star(method, seats, k)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolatorySet {
    pub method: Method,
    #[serde(rename = "M")]
    pub seats: u32,
    /// Disjoint open τ-intervals in increasing order.
    pub intervals: Vec<[f64; 2]>,
    pub total_length: f64,
}

impl ViolatorySet {
    pub fn contains(&self, tau: f64) -> bool {
        self.intervals.iter().any(|&[lo, hi]| lo < tau && tau < hi)
    }
}

/// τ-interval of limiting quota floor k: (1 − 2M/(3k), 1 − 2M/(3(k + len))).
fn tau_interval(seats: u32, k: u32, len: f64) -> [f64; 2] {
    let m = seats as f64;
    let k = k as f64;
    [1.0 - 2.0 * m / (3.0 * k), 1.0 - 2.0 * m / (3.0 * (k + len))]
}

/// The set V of ultimately violatory τ: one interval per k ∈ [⌈M/2⌉, M−1]
/// with D(k) > 0.
pub fn violatory_set(method: Method, seats: u32) -> Result<ViolatorySet> {
    method.require_guarantee("the violatory set is defined for methods with δ(0) = 0")?;
    if seats < 3 {
        return Err(Error::TooFewSeats { seats, states: 3 });
    }
    let mut intervals = Vec::new();
    let mut total = 0.0;
    for k in seats.div_ceil(2)..seats {
        let len = d_star_clamped(method, seats, k)?;
        if len > 0.0 {
            let iv = tau_interval(seats, k, len);
            total += iv[1] - iv[0];
            intervals.push(iv);
        }
    }
    Ok(ViolatorySet {
        method,
        seats,
        intervals,
        total_length: total,
    })
}

/// Breakpoints τ_k = 1 − 2M/(3k) where ⌊q̃₃⌋ changes, inside (−1/3, 1/3).
pub fn floor_breakpoints(seats: u32) -> Vec<f64> {
    (seats / 2 + 1..seats)
        .map(|k| 1.0 - 2.0 * seats as f64 / (3.0 * k as f64))
        .filter(|t| t.abs() < THIRD)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauProfile {
    pub tau: TauValue,
    #[serde(rename = "M")]
    pub seats: u32,
    pub q2_limit: f64,
    pub q3_limit: f64,
    pub k: u32,
    pub d: f64,
    pub d_star_raw: f64,
    pub d_star: f64,
    pub exceptional: bool,
    /// `None` when τ is exceptional.
    pub ultimately_violatory: Option<bool>,
}

pub fn tau_profile(method: Method, tau: TauValue, seats: u32) -> Result<TauProfile> {
    let lim = limiting_quotas(tau, seats);
    let k = lim.q3.floor() as u32;
    let raw = d_star(method, seats, k.clamp(1, seats - 1))?;
    let ultimately_violatory = if lim.exceptional {
        None
    } else {
        Some(is_ultimately_violatory(method, seats, tau)?)
    };
    Ok(TauProfile {
        tau,
        seats,
        q2_limit: lim.q2,
        q3_limit: lim.q3,
        k,
        d: lim.q3 - k as f64,
        d_star_raw: raw,
        d_star: raw.clamp(0.0, 1.0),
        exceptional: lim.exceptional,
        ultimately_violatory,
    })
}

/// Result of a doubling search along a τ-line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stabilization {
    /// x̂ = 2^exponent.
    pub exponent: u32,
    pub x_hat: f64,
    /// The limiting apportionment (1, a₂, a₃) = Ã(q̃₂, q̃₃).
    pub limit: [u32; 3],
}

/// Largest exponent tried by [`stabilization_scan`].
pub const MAX_SCAN_EXPONENT: u32 = 60;

/// Exact reduced vector (1, x, y(x, τ)) on a τ-line.
pub fn line_point_exact(x: &BigRational, tau: &BigRational) -> [BigRational; 3] {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let three = BigRational::from_integer(BigInt::from(3));
    let y = (&two * x - &one) / (&one - &three * tau);
    [one, x.clone(), y]
}

/// Ã(q̃₂, q̃₃) in exact arithmetic: (1, A(1 − 3τ, 2) on M − 1 seats).
pub fn limiting_apportionment(method: Method, tau: TauValue, seats: u32) -> Result<[u32; 3]> {
    method.require_guarantee("the limiting apportionment needs δ(0) = 0")?;
    let t = tau.exact();
    let three = BigRational::from_integer(BigInt::from(3));
    let q2_weight = BigRational::one() - &three * &t;
    let q3_weight = BigRational::from_integer(BigInt::from(2));
    let alloc = allocate::<Exact>(method, &Exact::pops(&[q2_weight, q3_weight]), seats - 1)
        .map_err(|_| Error::ExceptionalTau(tau.get()))?;
    Ok([1, alloc.seats[0], alloc.seats[1]])
}

/// Smallest power of two x at which A(1, x, y(x, τ)) equals the limiting
/// apportionment and the quota floors equal (0, ⌊q̃₂⌋, ⌊q̃₃⌋), confirmed
/// again at 2x and 4x.
pub fn stabilization_scan(method: Method, tau: TauValue, seats: u32) -> Result<Stabilization> {
    let lim = limiting_quotas(tau, seats);
    if lim.exceptional {
        return Err(Error::ExceptionalTau(tau.get()));
    }
    let limit = limiting_apportionment(method, tau, seats)?;
    let floors = [0u64, lim.q2.floor() as u64, lim.q3.floor() as u64];
    let t = tau.exact();

    let settled = |j: u32| -> bool {
        let x = BigRational::from_integer(BigInt::one() << j);
        let p = line_point_exact(&x, &t);
        if p[2] <= p[1] {
            return false;
        }
        let q = quotas_of(&p, seats);
        if q.quotas().iter().map(floor_u64).ne(floors.iter().copied()) {
            return false;
        }
        match allocate::<Exact>(method, &Exact::pops(&p), seats) {
            Ok(a) => a.seats == limit,
            Err(_) => false,
        }
    };

    let mut j = 1;
    while j + 2 <= MAX_SCAN_EXPONENT {
        if settled(j) && settled(j + 1) && settled(j + 2) {
            return Ok(Stabilization {
                exponent: j,
                x_hat: 2f64.powi(j as i32),
                limit,
            });
        }
        j += 1;
    }
    Err(Error::NoStabilization(MAX_SCAN_EXPONENT))
}
