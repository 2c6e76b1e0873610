//! Probability that a guaranteed seat causes a quota violation, for three
//! states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::method::Method;
use crate::quadrature::integrate;
use crate::tau::{d_star, violatory_set, wedge_entry, TauValue};
use crate::thresholds::threshold_set;

/// Joint density of the reduced pair (x, y) = (p₂/p₁, p₃/p₁).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DensitySpec {
    /// τ uniform on (−1/3, 1/3) with y → ∞; no pointwise density.
    #[serde(rename = "uniform-wedge")]
    UniformWedgeAsymptotic,
    /// Sorted i.i.d. exponential populations (any rate).
    #[serde(rename = "exp-iid")]
    ExpIID,
    /// Sorted Dirichlet(1, 1, 1) population shares.
    #[serde(rename = "dirichlet111")]
    Dirichlet111,
}

impl DensitySpec {
    pub fn name(self) -> &'static str {
        match self {
            DensitySpec::UniformWedgeAsymptotic => "uniform-wedge",
            DensitySpec::ExpIID => "exp-iid",
            DensitySpec::Dirichlet111 => "dirichlet111",
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DensitySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform-wedge" | "uniform" => Ok(DensitySpec::UniformWedgeAsymptotic),
            "exp-iid" | "exp" | "expiid" => Ok(DensitySpec::ExpIID),
            "dirichlet111" | "dirichlet" => Ok(DensitySpec::Dirichlet111),
            _ => Err(Error::Unknown {
                kind: "density",
                value: s.to_string(),
            }),
        }
    }
}

/// 12/(1 + x + y)³ for both sampling models; no bounds check.
fn exp_density(x: f64, y: f64) -> f64 {
    12.0 / (1.0 + x + y).powi(3)
}

pub fn density_eval(density: DensitySpec, x: f64, y: f64) -> Result<f64> {
    if !(1.0 < x && x < y) {
        return Err(Error::OutOfWedge);
    }
    match density {
        DensitySpec::UniformWedgeAsymptotic => Err(Error::UnsupportedDensity(
            "the asymptotic uniform model has no pointwise density",
        )),
        DensitySpec::ExpIID | DensitySpec::Dirichlet111 => Ok(exp_density(x, y)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ExactSum,
    ClosedForm,
    Limit,
    Integral,
    MonteCarlo,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ExactSum => "exact-sum",
            Mode::ClosedForm => "closed-form",
            Mode::Limit => "limit",
            Mode::Integral => "integral",
            Mode::MonteCarlo => "monte-carlo",
        }
    }
}

/// One term of a sum (indexed by k) or one τ-piece of an integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_raw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_range: Option<[f64; 2]>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityResult {
    pub method: Method,
    #[serde(rename = "M", skip_serializing_if = "Option::is_none")]
    pub seats: Option<u32>,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensitySpec>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    pub lower_bound_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_estimate: Option<f64>,
    /// |quadrature − closed-form inner integral| when a closed form exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_check: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub contributions: Vec<Contribution>,
}

impl ProbabilityResult {
    fn new(method: Method, seats: Option<u32>, mode: Mode, value: f64) -> Self {
        ProbabilityResult {
            method,
            seats,
            mode,
            density: None,
            value,
            tol: None,
            lower_bound_only: false,
            error_estimate: None,
            self_check: None,
            contributions: Vec::new(),
        }
    }

    pub fn csv_row(&self) -> ProbabilityRow {
        ProbabilityRow {
            method: self.method,
            seats: self.seats,
            mode: self.mode,
            density: self.density.map(|d| d.name().to_string()),
            value: self.value,
            tol: self.tol,
            lower_bound_only: self.lower_bound_only,
        }
    }
}

/// Flat CSV form of a [`ProbabilityResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityRow {
    pub method: Method,
    #[serde(rename = "M")]
    pub seats: Option<u32>,
    pub mode: Mode,
    pub density: Option<String>,
    pub value: f64,
    pub tol: Option<f64>,
    pub lower_bound_only: bool,
}

fn check_seats(seats: u32) -> Result<()> {
    if seats < 3 {
        Err(Error::TooFewSeats { seats, states: 3 })
    } else {
        Ok(())
    }
}

/// Σ_{k=⌈M/2⌉}^{M−1} M(1/k − 1/(k + max(D(k), 0))), the limiting
/// probability along uniformly distributed τ as the small state shrinks.
pub fn exact_probability(method: Method, seats: u32) -> Result<ProbabilityResult> {
    method.require_guarantee("the probability sum needs δ(0) = 0")?;
    check_seats(seats)?;
    let m = f64::from(seats);
    let contributions: Vec<Contribution> = (seats.div_ceil(2)..seats)
        .map(|k| {
            let raw = d_star(method, seats, k)?;
            let d = raw.clamp(0.0, 1.0);
            let kf = f64::from(k);
            Ok(Contribution {
                k: Some(k),
                d_raw: Some(raw),
                tau_range: None,
                value: m * (1.0 / kf - 1.0 / (kf + d)),
            })
        })
        .collect::<Result<_>>()?;
    let mut r = ProbabilityResult::new(
        method,
        Some(seats),
        Mode::ExactSum,
        contributions.iter().map(|c| c.value).sum(),
    );
    r.contributions = contributions;
    Ok(r)
}

/// 1/(M − 1), the Modified Jefferson probability.
pub fn jefferson_closed_form(seats: u32) -> Result<ProbabilityResult> {
    check_seats(seats)?;
    Ok(ProbabilityResult::new(
        Method::ModifiedJefferson,
        Some(seats),
        Mode::ClosedForm,
        1.0 / f64::from(seats - 1),
    ))
}

/// lim_{M→∞} of [`exact_probability`].
pub fn limit_probability(method: Method) -> Result<ProbabilityResult> {
    let value = match method {
        Method::Adams => 2.0 * std::f64::consts::LN_2 - 1.0,
        Method::ModifiedJefferson => 0.0,
        Method::HuntingtonHill | Method::ModifiedWebster | Method::Dean => {
            std::f64::consts::LN_2 - 0.5
        }
        Method::Jefferson | Method::Webster => {
            return Err(Error::UnsupportedMethod {
                method,
                reason: "the limit is defined for methods with δ(0) = 0",
            })
        }
    };
    Ok(ProbabilityResult::new(method, None, Mode::Limit, value))
}

pub const DEFAULT_TOL: f64 = 1e-6;
const INNER_TOL: f64 = 1e-13;

/// y-limits of the violation region on one τ-line, clipped to the wedge.
fn y_limits(method: Method, seats: u32, tau: f64) -> Option<(f64, Option<f64>)> {
    let t = TauValue::new(tau).ok()?;
    let set = threshold_set(method, t, seats).ok()?;
    let lo = set.y_f.max(wedge_entry(t));
    match set.y_max {
        Some(hi) if hi <= lo => None,
        hi => Some((lo, hi)),
    }
}

/// ∫ f(x(y, τ), y)·(3/2)y dy over [lo, hi], in u = 1/y.
fn inner_quadrature(tau: f64, lo: f64, hi: Option<f64>) -> f64 {
    let u_lo = hi.map_or(0.0, |h| 1.0 / h);
    let u_hi = 1.0 / lo;
    let g = |u: f64| {
        let y = 1.0 / u;
        let x = 0.5 * (1.0 - 3.0 * tau) * y + 0.5;
        exp_density(x, y) * 1.5 * y / (u * u)
    };
    integrate(g, u_lo, u_hi, INNER_TOL).value
}

/// Same inner integral from the antiderivative of (16/3)·y/(ay + 1)³.
fn inner_closed_form(tau: f64, lo: f64, hi: Option<f64>) -> f64 {
    let a = 1.0 - tau;
    let big_f = |y: f64| {
        let s = a * y + 1.0;
        (-1.0 / s + 0.5 / (s * s)) / (a * a)
    };
    16.0 / 3.0 * (hi.map_or(0.0, big_f) - big_f(lo))
}

/// τ-breakpoints: floor changes of q̃₃, the ends of V, and 0.
fn tau_pieces(method: Method, seats: u32) -> Result<Vec<[f64; 2]>> {
    let third = 1.0 / 3.0;
    let mut pts: Vec<f64> = crate::tau::floor_breakpoints(seats);
    pts.extend(violatory_set(method, seats)?.intervals.iter().flatten());
    pts.push(0.0);
    pts.retain(|t| t.abs() < third);
    pts.push(-third);
    pts.push(third);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    Ok(pts.windows(2).map(|w| [w[0], w[1]]).collect())
}

/// ∫∫ f(x(y, τ), y)·(3/2)y dy dτ over the region where the guaranteed seat
/// causes a violation. For Adams the thresholds miss some violations, so
/// the result is only a lower bound.
pub fn integral_probability(
    method: Method,
    seats: u32,
    density: DensitySpec,
    tol: f64,
) -> Result<ProbabilityResult> {
    method.require_guarantee("the integral needs δ(0) = 0")?;
    check_seats(seats)?;
    if density == DensitySpec::UniformWedgeAsymptotic {
        return Err(Error::UnsupportedDensity(
            "the asymptotic uniform model is evaluated by the exact sum",
        ));
    }
    let pieces = tau_pieces(method, seats)?;
    let piece_tol = tol / pieces.len() as f64;

    let outer = |inner: fn(f64, f64, Option<f64>) -> f64, [a, b]: [f64; 2]| {
        integrate(
            |t| y_limits(method, seats, t).map_or(0.0, |(lo, hi)| inner(t, lo, hi)),
            a,
            b,
            piece_tol,
        )
    };

    let mut contributions = Vec::with_capacity(pieces.len());
    let (mut value, mut error, mut check) = (0.0, 0.0, 0.0);
    for piece in pieces {
        let q = outer(inner_quadrature, piece);
        let c = outer(inner_closed_form, piece);
        value += q.value;
        error += q.error;
        check += q.value - c.value;
        contributions.push(Contribution {
            k: None,
            d_raw: None,
            tau_range: Some(piece),
            value: q.value,
        });
    }

    let mut r = ProbabilityResult::new(method, Some(seats), Mode::Integral, value.clamp(0.0, 1.0));
    r.density = Some(density);
    r.tol = Some(tol);
    r.lower_bound_only = method == Method::Adams;
    r.error_estimate = Some(error);
    r.self_check = Some(check.abs());
    r.contributions = contributions;
    Ok(r)
}

/// ∫∫ over the whole wedge, which is 1 for a normalized density.
pub fn density_mass(density: DensitySpec, tol: f64) -> Result<f64> {
    density_eval(density, 2.0, 3.0)?;
    let third = 1.0 / 3.0;
    let whole = |t: f64| {
        let lo = wedge_entry(TauValue::new(t).expect("interior node"));
        inner_quadrature(t, lo, None)
    };
    Ok(integrate(whole, -third, 0.0, tol / 2.0).value
        + integrate(whole, 0.0, third, tol / 2.0).value)
}
