use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use apportion_core::montecarlo::{
    estimate_violation_prob_with, theoretical_value, Interval, SamplerKind, SamplerSpec, DEFAULT_H,
    DEFAULT_SAMPLES,
};
use apportion_core::probability::{
    exact_probability, integral_probability, jefferson_closed_form, limit_probability, DensitySpec,
    DEFAULT_TOL,
};
use apportion_core::report::{Format, Report, ReportRow};
use apportion_core::tau::{tau_of, tau_profile, violatory_set, TauValue};
use apportion_core::thresholds::threshold_set;
use apportion_core::verify::{verify, Suite, VerifyOptions};
use apportion_core::{
    apportion, classify_violation, modified_apportion, standard_quotas, Error, Method,
    PopulationInstance,
};

#[derive(Parser)]
#[command(
    name = "quota",
    version,
    about = "Divisor-method apportionment and quota-violation probabilities"
)]
struct Cli {
    /// Output format: json, csv or md.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apportion seats and classify any quota violation.
    Apportion(ApportionArgs),
    /// Analytic violation probabilities.
    #[command(subcommand)]
    Prob(ProbCommand),
    /// Monte Carlo estimate of the violation probability.
    Simulate(SimulateArgs),
    /// Run the reference and property suites.
    Verify(VerifyArgs),
    /// τ of a population triple, or the profile of a τ-line.
    Tau(TauArgs),
    /// The set of ultimately violatory τ.
    Vset(VsetArgs),
}

#[derive(Args)]
struct ApportionArgs {
    #[arg(long)]
    method: Method,
    /// Comma-separated populations (decimals or fractions).
    #[arg(long, value_delimiter = ',', required = true)]
    pops: Vec<String>,
    #[arg(long)]
    seats: u32,
    /// Give the smallest state one seat and apportion the rest among the others.
    #[arg(long)]
    modified: bool,
}

#[derive(Subcommand)]
enum ProbCommand {
    /// Exact sum under the asymptotic uniform model.
    Exact {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        seats: u32,
    },
    /// Limit as the house size grows.
    Limit {
        #[arg(long)]
        method: Method,
    },
    /// Double integral against a population density.
    Integral {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        seats: u32,
        #[arg(long, default_value = "exp-iid")]
        density: DensitySpec,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// One row per method, one column per house size.
    Table {
        #[arg(long, value_delimiter = ',', default_value = "10,20,50,100,500,1000")]
        seats: Vec<u32>,
        /// Comma-separated methods, or "all".
        #[arg(long, value_delimiter = ',', default_value = "all")]
        methods: Vec<String>,
        #[arg(long, default_value = "uniform-wedge")]
        density: DensitySpec,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
}

#[derive(Args)]
struct SeedArg {
    /// Master seed; defaults to $QUOTA_SEED, then 42.
    #[arg(long, env = "QUOTA_SEED", default_value_t = apportion_core::montecarlo::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    seats: u32,
    /// wedge, exp-iid or dirichlet.
    #[arg(long, default_value = "wedge")]
    sampler: String,
    #[arg(long, default_value_t = DEFAULT_H)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[command(flatten)]
    seed: SeedArg,
    /// Use the Wilson score interval instead of Wald.
    #[arg(long)]
    wilson: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = 2000)]
    instances: usize,
}

#[derive(Args)]
struct TauArgs {
    /// Three populations; prints their τ.
    #[arg(long, value_delimiter = ',', conflicts_with = "tau")]
    pops: Vec<f64>,
    /// A τ value; prints its limiting quotas and thresholds.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long, default_value = "hh")]
    method: Method,
    #[arg(long, default_value_t = 10)]
    seats: u32,
}

#[derive(Args)]
struct VsetArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    seats: u32,
}

enum Failure {
    Usage(String),
    Tie(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TieDetected { .. } => Failure::Tie(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn parse_methods(names: &[String]) -> Result<Vec<Method>, Error> {
    if names.iter().any(|n| n == "all") {
        return Ok(Method::GUARANTEED.to_vec());
    }
    names.iter().map(|n| n.parse()).collect()
}

fn cmd_apportion(a: &ApportionArgs) -> Result<Report, Failure> {
    let inst = PopulationInstance::from_decimals(&a.pops, a.seats)?;
    let result = if a.modified {
        modified_apportion(a.method, &inst)?
    } else {
        apportion(a.method, &inst)?
    };
    let report = classify_violation(a.method, &inst)?;
    let quotas = standard_quotas(&inst).to_f64();
    let rows = a
        .pops
        .iter()
        .zip(&quotas)
        .zip(&result.seats)
        .enumerate()
        .map(|(i, ((p, q), s))| {
            ReportRow::new()
                .int("state", i as i64)
                .text("population", p.trim())
                .num("quota", *q)
                .int("seats", i64::from(*s))
                .flag("offending", report.offending_states.contains(&i))
                .text("violation", report.status.as_str())
                .text("cause", report.cause.as_str())
        })
        .collect();
    Ok(Report::new(rows))
}

fn result_row(r: &apportion_core::ProbabilityResult) -> Result<ReportRow, Failure> {
    Ok(ReportRow::from_serialize(&r.csv_row())?)
}

fn cmd_prob(p: &ProbCommand) -> Result<Report, Failure> {
    let rows = match p {
        ProbCommand::Exact { method, seats } => {
            let r = exact_probability(*method, *seats)?;
            let mut rows = vec![result_row(&r)?];
            if *method == Method::ModifiedJefferson {
                rows.push(result_row(&jefferson_closed_form(*seats)?)?);
            }
            rows
        }
        ProbCommand::Limit { method } => vec![result_row(&limit_probability(*method)?)?],
        ProbCommand::Integral {
            method,
            seats,
            density,
            tol,
        } => vec![result_row(&integral_probability(
            *method, *seats, *density, *tol,
        )?)?],
        ProbCommand::Table {
            seats,
            methods,
            density,
            tol,
        } => {
            let methods = parse_methods(methods)?;
            let mut rows = Vec::new();
            for m in methods {
                let mut row = ReportRow::new().text("method", m.display_name());
                for &s in seats {
                    let v = match density {
                        DensitySpec::UniformWedgeAsymptotic => exact_probability(m, s)?.value,
                        d => integral_probability(m, s, *d, *tol)?.value,
                    };
                    row = row.num(&format!("M={s}"), v);
                }
                rows.push(row);
            }
            rows
        }
    };
    Ok(Report::new(rows))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Report, Failure> {
    let kind = SamplerKind::from_name(&a.sampler, a.h, a.lambda)?;
    let spec = SamplerSpec::new(kind, a.seed.seed)?;
    let interval = if a.wilson {
        Interval::Wilson
    } else {
        Interval::Wald
    };
    let est = estimate_violation_prob_with(a.method, a.seats, &spec, a.samples, interval, true)?;
    let theory = theoretical_value(a.method, a.seats, &kind).ok();
    let row = ReportRow::from_serialize(&est.csv_row(theory))?
        .int("rejected_ties", est.rejected_ties as i64);
    Ok(Report::new(vec![row]))
}

fn cmd_verify(a: &VerifyArgs, format: Format) -> Result<(String, bool), Failure> {
    let opts = VerifyOptions {
        samples: a.samples,
        seed: a.seed.seed,
        instances: a.instances,
    };
    let summary = verify(a.suite, &opts)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&summary).expect("serializable") + "\n",
        f => {
            let rows = summary
                .checks
                .iter()
                .map(ReportRow::from_serialize)
                .collect::<Result<Vec<_>, _>>()?;
            Report::new(rows).render(f)
        }
    };
    Ok((text, summary.passed))
}

fn cmd_tau(a: &TauArgs) -> Result<Report, Failure> {
    if let Some(t) = a.tau {
        let tau = TauValue::new(t)?;
        let profile = ReportRow::from_serialize(&tau_profile(a.method, tau, a.seats)?)?;
        let mut row = profile.text("method", a.method.name());
        if let Ok(set) = threshold_set(a.method, tau, a.seats) {
            let thresholds = ReportRow::from_serialize(&set)?;
            for k in thresholds.keys() {
                if k != "ultimately_violatory" {
                    row = match thresholds.get(k).and_then(|v| v.as_f64()) {
                        Some(v) => row.num(k, v),
                        None => row.text(k, "inf"),
                    };
                }
            }
        }
        return Ok(Report::new(vec![row]));
    }
    let [a0, b, c] = a.pops[..] else {
        return Err(Failure::Usage(
            "--pops needs exactly three values, or pass --tau".into(),
        ));
    };
    let t = tau_of([a0, b, c])?;
    Ok(Report::new(vec![ReportRow::new().num("tau", t.get())]))
}

fn cmd_vset(a: &VsetArgs) -> Result<Report, Failure> {
    let v = violatory_set(a.method, a.seats)?;
    let rows = v
        .intervals
        .iter()
        .map(|&[lo, hi]| {
            ReportRow::new()
                .text("method", a.method.name())
                .int("M", i64::from(a.seats))
                .num("tau_low", lo)
                .num("tau_high", hi)
                .num("total_length", v.total_length)
        })
        .collect();
    Ok(Report::new(rows))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let report = match &cli.command {
        Command::Apportion(a) => cmd_apportion(a)?,
        Command::Prob(p) => cmd_prob(p)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Tau(a) => cmd_tau(a)?,
        Command::Vset(a) => cmd_vset(a)?,
        Command::Verify(a) => {
            let (text, passed) = cmd_verify(a, cli.format)?;
            emit(&text, &cli.out)?;
            return if passed {
                Ok(())
            } else {
                Err(Failure::Verification("verification failed".into()))
            };
        }
    };
    emit(&report.render(cli.format), &cli.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Tie(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
