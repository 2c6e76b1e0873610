//! Seeded population samplers and Monte Carlo estimates of violation
//! frequencies.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::method::Method;
use crate::probability::{exact_probability, integral_probability, DensitySpec, DEFAULT_TOL};
use crate::tau::tau_of;
use crate::violation::{classify_violation_f64, ViolationStatus};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_H: f64 = 1e6;
pub const DEFAULT_SAMPLES: u64 = 100_000;
/// Samples drawn from one generator before the next chunk seed is used.
pub const CHUNK_SIZE: u64 = 4096;
/// 97.5% standard normal quantile.
const Z95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerKind {
    /// (1, min(x, y), max(x, y)) with x, y uniform on [1, h].
    WedgeUniform { h: f64 },
    /// Three sorted i.i.d. exponentials with rate λ.
    #[serde(rename = "exp-iid")]
    ExpIID { lambda: f64 },
    /// Three sorted exponential draws divided by their sum.
    Dirichlet111,
}

impl SamplerKind {
    /// Looks up a sampler by name; `h` and `lambda` are used by the wedge
    /// and exponential samplers.
    pub fn from_name(name: &str, h: f64, lambda: f64) -> Result<Self> {
        match name {
            "wedge" | "wedge-uniform" | "uniform" => Ok(SamplerKind::WedgeUniform { h }),
            "exp" | "exp-iid" => Ok(SamplerKind::ExpIID { lambda }),
            "dirichlet" | "dirichlet111" => Ok(SamplerKind::Dirichlet111),
            _ => Err(Error::Unknown {
                kind: "sampler",
                value: name.to_string(),
            }),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SamplerKind::WedgeUniform { h } => format!("wedge(h={h})"),
            SamplerKind::ExpIID { lambda } => format!("exp-iid(lambda={lambda})"),
            SamplerKind::Dirichlet111 => "dirichlet111".to_string(),
        }
    }

    /// The density whose analytic probability this sampler approximates.
    pub fn density(&self) -> DensitySpec {
        match self {
            SamplerKind::WedgeUniform { .. } => DensitySpec::UniformWedgeAsymptotic,
            SamplerKind::ExpIID { .. } => DensitySpec::ExpIID,
            SamplerKind::Dirichlet111 => DensitySpec::Dirichlet111,
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub kind: SamplerKind,
    pub seed: u64,
}

impl SamplerSpec {
    pub fn new(kind: SamplerKind, seed: u64) -> Result<Self> {
        match kind {
            SamplerKind::WedgeUniform { h } if !(h > 1.0 && h.is_finite()) => {
                Err(Error::OutOfRange {
                    value: h,
                    range: "(1, inf)".into(),
                })
            }
            SamplerKind::ExpIID { lambda } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::OutOfRange {
                    value: lambda,
                    range: "(0, inf)".into(),
                })
            }
            _ => Ok(SamplerSpec { kind, seed }),
        }
    }

    pub fn stream(&self) -> SampleStream {
        SampleStream::new(self.kind, self.seed)
    }

    /// Generator for chunk `c` of a chunked run.
    fn chunk_stream(&self, c: u64) -> SampleStream {
        SampleStream::new(self.kind, self.seed ^ splitmix64(c))
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum Draw {
    Wedge(Uniform<f64>),
    Exp(Exp<f64>),
}

/// An endless, reproducible stream of ascending population triples.
pub struct SampleStream {
    rng: ChaCha8Rng,
    draw: Draw,
    normalize: bool,
    /// Draws discarded because two populations coincided.
    pub duplicates: u64,
}

impl SampleStream {
    fn new(kind: SamplerKind, seed: u64) -> Self {
        let (draw, normalize) = match kind {
            SamplerKind::WedgeUniform { h } => (
                Draw::Wedge(Uniform::new_inclusive(1.0, h).expect("h > 1")),
                false,
            ),
            SamplerKind::ExpIID { lambda } => (Draw::Exp(Exp::new(lambda).expect("λ > 0")), false),
            SamplerKind::Dirichlet111 => (Draw::Exp(Exp::new(1.0).expect("rate 1")), true),
        };
        SampleStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            draw,
            normalize,
            duplicates: 0,
        }
    }

    fn raw(&mut self) -> [f64; 3] {
        match &self.draw {
            Draw::Wedge(u) => [1.0, u.sample(&mut self.rng), u.sample(&mut self.rng)],
            Draw::Exp(e) => {
                let p = [
                    e.sample(&mut self.rng),
                    e.sample(&mut self.rng),
                    e.sample(&mut self.rng),
                ];
                if self.normalize {
                    let s: f64 = p.iter().sum();
                    p.map(|v| v / s)
                } else {
                    p
                }
            }
        }
    }

    /// Next triple p₁ < p₂ < p₃; draws with coincident values are redrawn.
    pub fn next_triple(&mut self) -> [f64; 3] {
        loop {
            let mut p = self.raw();
            p.sort_by(f64::total_cmp);
            if p[0] < p[1] && p[1] < p[2] && p[0] > 0.0 {
                return p;
            }
            self.duplicates += 1;
        }
    }
}

impl Iterator for SampleStream {
    type Item = [f64; 3];
    fn next(&mut self) -> Option<[f64; 3]> {
        Some(self.next_triple())
    }
}

/// The first `n` triples of the stream for `spec`.
pub fn sample(spec: &SamplerSpec, n: usize) -> Vec<[f64; 3]> {
    spec.stream().take(n).collect()
}

/// `n` three-state instances cycling through wedge (h = 10⁶ and 10²),
/// exponential and Dirichlet samplers, each with a house size drawn
/// uniformly from `seats`.
pub fn mixed_instances(
    seed: u64,
    n: usize,
    seats: std::ops::RangeInclusive<u32>,
) -> Vec<([f64; 3], u32)> {
    let kinds = [
        SamplerKind::WedgeUniform { h: DEFAULT_H },
        SamplerKind::WedgeUniform { h: 100.0 },
        SamplerKind::ExpIID { lambda: 1.0 },
        SamplerKind::Dirichlet111,
    ];
    let mut streams: Vec<SampleStream> = kinds
        .iter()
        .zip(0u64..)
        .map(|(&k, i)| SampleStream::new(k, seed ^ splitmix64(i)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            (
                streams[i % kinds.len()].next_triple(),
                rng.random_range(seats.clone()),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interval {
    #[default]
    Wald,
    Wilson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub method: Method,
    #[serde(rename = "M")]
    pub seats: u32,
    pub sampler: SamplerKind,
    pub seed: u64,
    pub n: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub interval: Interval,
    /// Samples redrawn because of coincident populations or an exact
    /// priority tie.
    pub rejected_ties: u64,
}

impl EstimateResult {
    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }

    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.n as f64).sqrt()
    }

    pub fn csv_row(&self, theoretical: Option<f64>) -> EstimateRow {
        EstimateRow {
            method: self.method,
            seats: self.seats,
            sampler: self.sampler.label(),
            n: self.n,
            seed: self.seed,
            p_hat: self.p_hat,
            ci_low: self.ci_low,
            ci_high: self.ci_high,
            theoretical,
            in_ci: theoretical.map(|t| self.contains(t)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub method: Method,
    #[serde(rename = "M")]
    pub seats: u32,
    pub sampler: String,
    pub n: u64,
    pub seed: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub theoretical: Option<f64>,
    pub in_ci: Option<bool>,
}

pub fn confidence_interval(hits: u64, n: u64, interval: Interval) -> (f64, f64) {
    let nf = n as f64;
    let p = hits as f64 / nf;
    match interval {
        Interval::Wald => {
            let half = Z95 * (p * (1.0 - p) / nf).sqrt();
            ((p - half).max(0.0), (p + half).min(1.0))
        }
        Interval::Wilson => {
            let z2 = Z95 * Z95;
            let denom = 1.0 + z2 / nf;
            let centre = (p + z2 / (2.0 * nf)) / denom;
            let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
            ((centre - half).max(0.0), (centre + half).min(1.0))
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    hits: u64,
    rejected: u64,
}

fn run_chunk(method: Method, seats: u32, spec: &SamplerSpec, c: u64, len: u64) -> Result<Tally> {
    let mut stream = spec.chunk_stream(c);
    let mut tally = Tally::default();
    let mut done = 0;
    while done < len {
        let p = stream.next_triple();
        match classify_violation_f64(method, &p, seats) {
            Ok(r) => {
                tally.hits +=
                    u64::from(r.is_caused_by_nonzero() && r.status == ViolationStatus::Lower);
                done += 1;
            }
            Err(Error::TieDetected { .. }) => tally.rejected += 1,
            Err(e) => return Err(e),
        }
    }
    tally.rejected += stream.duplicates;
    Ok(tally)
}

fn chunk_lengths(n: u64) -> impl Iterator<Item = (u64, u64)> {
    (0..n.div_ceil(CHUNK_SIZE)).map(move |c| (c, CHUNK_SIZE.min(n - c * CHUNK_SIZE)))
}

/// Fraction of `n` sampled instances with a lower violation caused by the
/// guaranteed seat. Chunks run in parallel when `parallel` is set; the result is
/// identical either way.
pub fn estimate_violation_prob_with(
    method: Method,
    seats: u32,
    spec: &SamplerSpec,
    n: u64,
    interval: Interval,
    parallel: bool,
) -> Result<EstimateResult> {
    if n == 0 {
        return Err(Error::InsufficientSamples);
    }
    if seats < 3 {
        return Err(Error::TooFewSeats { seats, states: 3 });
    }
    let chunks: Vec<(u64, u64)> = chunk_lengths(n).collect();
    let tallies: Vec<Tally> = if parallel {
        chunks
            .par_iter()
            .map(|&(c, len)| run_chunk(method, seats, spec, c, len))
            .collect::<Result<_>>()?
    } else {
        chunks
            .iter()
            .map(|&(c, len)| run_chunk(method, seats, spec, c, len))
            .collect::<Result<_>>()?
    };
    let hits: u64 = tallies.iter().map(|t| t.hits).sum();
    let rejected_ties = tallies.iter().map(|t| t.rejected).sum();
    let (ci_low, ci_high) = confidence_interval(hits, n, interval);
    Ok(EstimateResult {
        method,
        seats,
        sampler: spec.kind,
        seed: spec.seed,
        n,
        hits,
        p_hat: hits as f64 / n as f64,
        ci_low,
        ci_high,
        interval,
        rejected_ties,
    })
}

pub fn estimate_violation_prob(
    method: Method,
    seats: u32,
    spec: &SamplerSpec,
    n: u64,
) -> Result<EstimateResult> {
    estimate_violation_prob_with(method, seats, spec, n, Interval::Wald, true)
}

/// The analytic value a sampler's estimate should approach.
pub fn theoretical_value(method: Method, seats: u32, kind: &SamplerKind) -> Result<f64> {
    match kind.density() {
        DensitySpec::UniformWedgeAsymptotic => Ok(exact_probability(method, seats)?.value),
        d => Ok(integral_probability(method, seats, d, DEFAULT_TOL)?.value),
    }
}

/// Estimates at several wedge heights h, to show the finite-h bias.
pub fn h_sensitivity(
    method: Method,
    seats: u32,
    hs: &[f64],
    seed: u64,
    n: u64,
) -> Result<Vec<EstimateResult>> {
    hs.iter()
        .map(|&h| {
            let spec = SamplerSpec::new(SamplerKind::WedgeUniform { h }, seed)?;
            estimate_violation_prob(method, seats, &spec, n)
        })
        .collect()
}

/// Critical value of √n·D at the 1% level, large-sample.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: u64,
    /// sup |F_n − F| against Uniform(−1/3, 1/3).
    pub statistic: f64,
    /// √n·statistic.
    pub scaled: f64,
    pub passes_1pct: bool,
}

/// One-sample Kolmogorov–Smirnov statistic of sorted `values` against the
/// continuous CDF `cdf`.
pub fn ks_statistic(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// KS test of τ over `n` samples against Uniform(−1/3, 1/3).
pub fn tau_uniformity_check(spec: &SamplerSpec, n: u64) -> Result<KsResult> {
    if n < 1000 {
        return Err(Error::InsufficientSamples);
    }
    let mut taus: Vec<f64> = spec
        .stream()
        .take(n as usize)
        .map(|p| tau_of(p).map(|t| t.get()))
        .collect::<Result<_>>()?;
    let third = 1.0 / 3.0;
    let d = ks_statistic(&mut taus, |t| ((t + third) * 1.5).clamp(0.0, 1.0));
    let scaled = d * (n as f64).sqrt();
    Ok(KsResult {
        n,
        statistic: d,
        scaled,
        passes_1pct: scaled < KS_CRITICAL_1PCT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wedge(seed: u64) -> SamplerSpec {
        SamplerSpec::new(SamplerKind::WedgeUniform { h: DEFAULT_H }, seed).unwrap()
    }

    #[test]
    fn streams_replay() {
        let a = sample(&wedge(7), 100);
        assert_eq!(a, sample(&wedge(7), 100));
        assert_ne!(a, sample(&wedge(8), 100));
        assert!(a.iter().all(|p| p[0] == 1.0 && p[0] < p[1] && p[1] < p[2]));
        let e = SamplerSpec::new(SamplerKind::ExpIID { lambda: 2.0 }, 1).unwrap();
        assert!(sample(&e, 100).iter().all(|p| p[0] < p[1] && p[1] < p[2]));
        let d = SamplerSpec::new(SamplerKind::Dirichlet111, 1).unwrap();
        for p in sample(&d, 100) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(SamplerSpec::new(SamplerKind::WedgeUniform { h: 1.0 }, 0).is_err());
        assert!(SamplerSpec::new(SamplerKind::ExpIID { lambda: 0.0 }, 0).is_err());
    }

    #[test]
    fn wedge_ratio_mean() {
        let n = 100_000;
        let mean = sample(&wedge(3), n)
            .iter()
            .map(|p| p[1] / p[2])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn intervals() {
        let (lo, hi) = confidence_interval(11_100, 100_000, Interval::Wald);
        assert!((lo - 0.109).abs() < 5e-4 && (hi - 0.113).abs() < 5e-4);
        let (lo, hi) = confidence_interval(0, 100, Interval::Wald);
        assert_eq!((lo, hi), (0.0, 0.0));
        let (lo, hi) = confidence_interval(0, 100, Interval::Wilson);
        assert!(lo == 0.0 && hi > 0.0);
    }

    #[test]
    fn parallel_equals_serial() {
        let spec = SamplerSpec::new(SamplerKind::ExpIID { lambda: 1.0 }, 11).unwrap();
        let par = estimate_violation_prob_with(
            Method::HuntingtonHill,
            5,
            &spec,
            20_000,
            Interval::Wald,
            true,
        )
        .unwrap();
        let ser = estimate_violation_prob_with(
            Method::HuntingtonHill,
            5,
            &spec,
            20_000,
            Interval::Wald,
            false,
        )
        .unwrap();
        assert_eq!(par, ser);
        assert!(par.ci_low <= par.p_hat && par.p_hat <= par.ci_high);
        assert!(matches!(
            estimate_violation_prob(Method::HuntingtonHill, 5, &spec, 0),
            Err(Error::InsufficientSamples)
        ));
    }

    #[test]
    fn ks_on_known_samples() {
        let mut grid: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_statistic(&mut grid, |x| x) <= 0.0005 + 1e-12);
        let narrow = SamplerSpec::new(SamplerKind::WedgeUniform { h: 1.01 }, 5).unwrap();
        assert!(!tau_uniformity_check(&narrow, 10_000).unwrap().passes_1pct);
        assert!(tau_uniformity_check(&wedge(5), 999).is_err());
    }
}
