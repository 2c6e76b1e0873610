//! Batch checks against published reference tables and structural
//! invariants.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::apportion;
use crate::error::{Error, Result};
use crate::method::Method;
use crate::montecarlo::{
    estimate_violation_prob, mixed_instances, SamplerKind, SamplerSpec, DEFAULT_H,
};
use crate::population::{standard_quotas, PopulationInstance};
use crate::probability::{
    exact_probability, integral_probability, jefferson_closed_form, limit_probability, DensitySpec,
    DEFAULT_TOL,
};
use crate::tau::{d_star, violatory_set};
use crate::violation::{classify_violation, criteria_test, ViolationStatus};

pub const TABLE1_SEATS: [u32; 6] = [10, 20, 50, 100, 500, 1000];

/// Reference probabilities under the asymptotic uniform model, rounded to
/// 3 decimals.
pub const TABLE1: [(Method, [&str; 6]); 5] = [
    (
        Method::ModifiedJefferson,
        ["0.111", "0.053", "0.020", "0.010", "0.002", "0.001"],
    ),
    (
        Method::Adams,
        ["0.380", "0.385", "0.386", "0.386", "0.386", "0.386"],
    ),
    (
        Method::ModifiedWebster,
        ["0.235", "0.213", "0.201", "0.197", "0.194", "0.194"],
    ),
    (
        Method::HuntingtonHill,
        ["0.257", "0.229", "0.209", "0.202", "0.195", "0.194"],
    ),
    (
        Method::Dean,
        ["0.278", "0.244", "0.218", "0.207", "0.197", "0.195"],
    ),
];

/// Reference probabilities for sorted i.i.d. exponential populations.
pub const APPENDIX_EXP: [(Method, u32, f64); 12] = [
    (Method::HuntingtonHill, 5, 0.131),
    (Method::HuntingtonHill, 10, 0.049),
    (Method::HuntingtonHill, 15, 0.029),
    (Method::Dean, 5, 0.137),
    (Method::Dean, 10, 0.056),
    (Method::Dean, 15, 0.033),
    (Method::ModifiedJefferson, 5, 0.120),
    (Method::ModifiedJefferson, 10, 0.030),
    (Method::ModifiedJefferson, 15, 0.013),
    (Method::ModifiedWebster, 5, 0.126),
    (Method::ModifiedWebster, 10, 0.043),
    (Method::ModifiedWebster, 15, 0.025),
];

/// Rows simulated with the wedge sampler.
pub const APPENDIX_WEDGE: [(Method, u32); 15] = [
    (Method::HuntingtonHill, 10),
    (Method::HuntingtonHill, 20),
    (Method::HuntingtonHill, 50),
    (Method::Adams, 10),
    (Method::Adams, 20),
    (Method::Adams, 50),
    (Method::Dean, 10),
    (Method::Dean, 20),
    (Method::Dean, 50),
    (Method::ModifiedJefferson, 10),
    (Method::ModifiedJefferson, 20),
    (Method::ModifiedJefferson, 50),
    (Method::ModifiedWebster, 10),
    (Method::ModifiedWebster, 20),
    (Method::ModifiedWebster, 50),
];

pub const MIN_EXP_COVERAGE: usize = 11;
pub const MIN_WEDGE_COVERAGE: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Table1,
    Appendix,
    Properties,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Suite::Table1),
            "appendix" => Ok(Suite::Appendix),
            "properties" => Ok(Suite::Properties),
            "all" => Ok(Suite::All),
            _ => Err(Error::Unknown {
                kind: "suite",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Table1 => "table1",
            Suite::Appendix => "appendix",
            Suite::Properties => "properties",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub expected: String,
    pub got: String,
    pub passed: bool,
    /// Informational rows do not decide the outcome.
    pub required: bool,
}

impl Check {
    fn new(suite: &'static str, name: String, expected: String, got: String, passed: bool) -> Self {
        Check {
            suite,
            name,
            expected,
            got,
            passed,
            required: true,
        }
    }

    fn informational(mut self) -> Self {
        self.required = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub suite: String,
    pub passed: bool,
    pub total: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl VerifySummary {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let failed = checks.iter().filter(|c| c.required && !c.passed).count();
        VerifySummary {
            suite: suite.to_string(),
            passed: failed == 0,
            total: checks.len(),
            failed,
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.required && !c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub samples: u64,
    pub seed: u64,
    /// Random instances per structural property.
    pub instances: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: crate::montecarlo::DEFAULT_SAMPLES,
            seed: crate::montecarlo::DEFAULT_SEED,
            instances: 2000,
        }
    }
}

pub fn verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifySummary> {
    let checks = match suite {
        Suite::Table1 => table1_checks()?,
        Suite::Appendix => appendix_checks(opts)?,
        Suite::Properties => property_checks(opts)?,
        Suite::All => {
            let mut all = table1_checks()?;
            all.extend(appendix_checks(opts)?);
            all.extend(property_checks(opts)?);
            all
        }
    };
    Ok(VerifySummary::new(suite, checks))
}

pub fn table1_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (method, row) in TABLE1 {
        for (seats, want) in TABLE1_SEATS.into_iter().zip(row) {
            let got = format!("{:.3}", exact_probability(method, seats)?.value);
            checks.push(Check::new(
                "table1",
                format!("{method} M={seats}"),
                want.to_string(),
                got.clone(),
                got == want,
            ));
        }
    }
    Ok(checks)
}

pub fn appendix_analytic_checks() -> Result<Vec<Check>> {
    APPENDIX_EXP
        .iter()
        .map(|&(method, seats, want)| {
            let got = integral_probability(method, seats, DensitySpec::ExpIID, DEFAULT_TOL)?.value;
            Ok(Check::new(
                "appendix",
                format!("integral {method} M={seats}"),
                format!("{want:.3}"),
                format!("{got:.6}"),
                (got - want).abs() <= 1e-3,
            ))
        })
        .collect()
}

/// Monte Carlo estimate for each reference row and whether its 95% interval
/// covers the analytic value.
pub fn appendix_coverage(
    kind: SamplerKind,
    rows: &[(Method, u32)],
    opts: &VerifyOptions,
) -> Result<Vec<Check>> {
    let spec = SamplerSpec::new(kind, opts.seed)?;
    rows.iter()
        .map(|&(method, seats)| {
            let want = crate::montecarlo::theoretical_value(method, seats, &kind)?;
            let est = estimate_violation_prob(method, seats, &spec, opts.samples)?;
            Ok(Check::new(
                "appendix",
                format!("simulate {} {method} M={seats}", kind.label()),
                format!("{want:.6}"),
                format!("{:.6} ({:.6}, {:.6})", est.p_hat, est.ci_low, est.ci_high),
                est.contains(want),
            )
            .informational())
        })
        .collect()
}

fn coverage_check(name: &str, rows: &[Check], min: usize) -> Check {
    let covered = rows.iter().filter(|c| c.passed).count();
    Check::new(
        "appendix",
        name.to_string(),
        format!(">= {min} of {}", rows.len()),
        covered.to_string(),
        covered >= min,
    )
}

pub fn appendix_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = appendix_analytic_checks()?;
    let exp_rows: Vec<(Method, u32)> = APPENDIX_EXP.iter().map(|&(m, s, _)| (m, s)).collect();
    let exp = appendix_coverage(SamplerKind::ExpIID { lambda: 1.0 }, &exp_rows, opts)?;
    let wedge = appendix_coverage(
        SamplerKind::WedgeUniform { h: DEFAULT_H },
        &APPENDIX_WEDGE,
        opts,
    )?;
    checks.push(coverage_check("exp-iid coverage", &exp, MIN_EXP_COVERAGE));
    checks.push(coverage_check("wedge coverage", &wedge, MIN_WEDGE_COVERAGE));
    checks.extend(exp);
    checks.extend(wedge);
    Ok(checks)
}

/// Cheap versions of the structural invariants.
pub fn property_checks(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut push = |name: &str, bad: usize| {
        checks.push(Check::new(
            "properties",
            name.to_string(),
            "0".into(),
            bad.to_string(),
            bad == 0,
        ))
    };

    let bad = (3..=500)
        .filter(|&m| {
            let s = exact_probability(Method::ModifiedJefferson, m).map(|r| r.value);
            let c = jefferson_closed_form(m).map(|r| r.value);
            !matches!((s, c), (Ok(s), Ok(c)) if (s - c).abs() <= 1e-12)
        })
        .count();
    push("closed form equals sum, M in [3, 500]", bad);

    let mut bad = 0;
    for m in Method::GUARANTEED {
        let lim = limit_probability(m)?.value;
        let tol = if m == Method::ModifiedJefferson {
            0.0011
        } else {
            0.002
        };
        bad += usize::from((exact_probability(m, 1000)?.value - lim).abs() > tol);
    }
    push("M = 1000 within tolerance of the limit", bad);

    let mut bad_len = 0;
    let mut bad_half = 0;
    for m in Method::GUARANTEED {
        for seats in 3..=200 {
            let p = exact_probability(m, seats)?.value;
            bad_len += usize::from((p - 1.5 * violatory_set(m, seats)?.total_length).abs() > 1e-12);
            bad_half += usize::from(d_star(m, seats, seats / 2)? > 1e-12);
        }
    }
    push("sum equals 3/2 times violatory length", bad_len);
    push("D(floor(M/2)) <= 0", bad_half);

    let instances = mixed_instances(opts.seed, opts.instances, 5..=50);
    let mut two_state = 0;
    let mut mixed = 0;
    let mut shape = 0;
    let mut criteria = 0;
    for m in Method::GUARANTEED {
        for (p, seats) in &instances {
            let inst = PopulationInstance::from_f64(p, *seats)?;
            let pair = PopulationInstance::from_f64(&p[1..], *seats)?;
            match classify_violation(m, &pair) {
                Ok(r) => two_state += usize::from(r.status != ViolationStatus::None),
                Err(Error::TieDetected { .. }) => {}
                Err(e) => return Err(e),
            }
            let report = match classify_violation(m, &inst) {
                Ok(r) => r,
                Err(Error::MixedViolation) => {
                    mixed += 1;
                    continue;
                }
                Err(Error::TieDetected { .. }) => continue,
                Err(e) => return Err(e),
            };
            let q = standard_quotas(&inst);
            let lower = report.status == ViolationStatus::Lower;
            criteria += usize::from(criteria_test(m, &q, *seats)? != lower);
            if lower {
                let a = apportion(m, &inst)?.seats;
                let (c, f) = (q.ceilings(), q.floors());
                let want = [c[0], c[1], f[2].wrapping_sub(1)];
                shape += usize::from(a.iter().map(|&s| u64::from(s)).ne(want));
            }
        }
    }
    push("no two-state violations", two_state);
    push("no simultaneous upper and lower violation", mixed);
    push("lower violations have shape (ceil, ceil, floor - 1)", shape);
    push("criteria test agrees with engine", criteria);
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_passes() {
        let checks = table1_checks().unwrap();
        assert_eq!(checks.len(), 30);
        assert!(checks.iter().all(|c| c.passed), "{checks:#?}");
    }

    #[test]
    fn properties_pass_on_a_small_draw() {
        let opts = VerifyOptions {
            instances: 200,
            ..VerifyOptions::default()
        };
        let s = verify(Suite::Properties, &opts).unwrap();
        assert!(s.passed, "{:#?}", s.failures().collect::<Vec<_>>());
    }

    #[test]
    fn suite_names() {
        for s in ["table1", "appendix", "properties", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!("x".parse::<Suite>().is_err());
    }
}
