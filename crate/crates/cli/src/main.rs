use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use sigroute::coupling::{run_coupling, CouplingConfig, DEFAULT_CHECKPOINTS};
use sigroute::exact::{centralized_dp, ExactEvalConfig, ExactRecord};
use sigroute::harness::output::{write_csv, write_json, write_trace_csv};
use sigroute::harness::{run_experiment, run_replication, ConfigValues, ExperimentConfig, OutputFormat};
use sigroute::steady::{steady_report, DEFAULT_CAP};
use sigroute::{Convention, Error, PolicyKind};

#[derive(Parser)]
#[command(name = "sigroute", version, about = "Two-queue routing with signaling through routing actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo simulation of one policy; writes a summary (json) or
    /// per-slot traces (csv).
    Simulate {
        #[command(flatten)]
        common: Common,
        /// finite: total cost over the horizon; average: running average cost.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Exact expected finite-horizon cost by enumeration.
    Exact {
        #[command(flatten)]
        common: Common,
        /// Also report the centralized optimum.
        #[arg(long)]
        dp: bool,
    },
    /// Average cost per slot of ghat and g0 from the stationary laws.
    Steady {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Simulates several policies on the same seeds, or with --coupling
    /// checks the pathwise coupling of ghat against uncontrolled queues.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        coupling: bool,
        /// Times at which marginal laws are compared (coupling only).
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<usize>>,
    },
    /// Distribution of the first time the belief supports are within one
    /// of each other.
    T0 {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    /// ghat, g0 or gtilde (exact and compare accept a comma-separated list).
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    replications: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// linear, square, poly:<c0,c1,...>, or per-stage costs joined by `/`.
    #[arg(long)]
    cost: Option<String>,
    /// `eq:<x0>`, a JSON file with two PMFs, or the JSON itself.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// independent or exclusive (exact also accepts both).
    #[arg(long)]
    convention: Option<String>,
}

impl Common {
    fn values(&self) -> Result<ConfigValues, Error> {
        let file = match &self.config {
            Some(p) => ConfigValues::from_flat_file(p)?,
            None => ConfigValues::default(),
        };
        Ok(file.overridden_by(ConfigValues {
            lambda: self.lambda,
            mu: self.mu,
            policy: self.policy.clone(),
            horizon: self.horizon,
            replications: self.replications,
            seed: self.seed,
            cost: self.cost.clone(),
            init: self.init.clone(),
            out: self.out.clone(),
            format: self.format.clone(),
            convention: self.convention.clone(),
            ..Default::default()
        }))
    }
}

/// Outcome of a subcommand that ran to completion.
enum Verdict {
    Pass,
    Violation(String),
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn format_of(values: &ConfigValues) -> Result<OutputFormat, Error> {
    values.format.as_deref().unwrap_or("json").parse()
}

fn emit<T: Serialize>(values: &ConfigValues, rows: &[T]) -> Result<(), Error> {
    let mut w = sink(&values.out)?;
    match format_of(values)? {
        OutputFormat::Json if rows.len() == 1 => write_json(&mut w, &rows[0])?,
        OutputFormat::Json => write_json(&mut w, rows)?,
        OutputFormat::Csv => write_csv(&mut w, rows)?,
    }
    w.flush()?;
    Ok(())
}

fn policies(values: &ConfigValues, default: &str) -> Result<Vec<PolicyKind>, Error> {
    values
        .policy
        .as_deref()
        .unwrap_or(default)
        .split(',')
        .map(|s| s.trim().parse())
        .collect()
}

fn simulate(common: &Common, mode: Option<String>) -> Result<Verdict, Error> {
    let values = ConfigValues { mode, ..common.values()? };
    let cfg = values.build()?;
    let summary = match cfg.format {
        OutputFormat::Json => {
            let s = run_experiment(&cfg)?;
            emit(&values, &[&s])?;
            s
        }
        OutputFormat::Csv => {
            let mut w = sink(&cfg.out)?;
            let mut stats = Vec::new();
            let mut all = Vec::new();
            for rep in 0..cfg.replications {
                let (trace, s) = run_replication(&cfg, rep)?;
                all.extend(trace);
                stats.push(s);
            }
            write_trace_csv(&mut w, &all)?;
            w.flush()?;
            sigroute::harness::sim::summarize(&cfg, &stats)
        }
    };
    Ok(if summary.passed {
        Verdict::Pass
    } else {
        Verdict::Violation(format!("{:?}", summary.first_failure))
    })
}

fn exact(common: &Common, dp: bool) -> Result<Verdict, Error> {
    let values = common.values()?;
    let conventions: Vec<Convention> = match values.convention.as_deref() {
        Some("both") => Convention::ALL.to_vec(),
        Some(c) => vec![c.parse()?],
        None => vec![Convention::default()],
    };
    let mut records = Vec::new();
    for conv in conventions {
        let v = ConfigValues {
            convention: Some(conv.to_string()),
            horizon: Some(values.horizon.unwrap_or(2)),
            policy: None,
            ..values.clone()
        };
        let cfg: ExperimentConfig = v.build()?;
        let e = ExactEvalConfig::new(cfg.horizon, cfg.params, cfg.initial.clone(), cfg.cost.clone())?;
        for p in policies(&values, "ghat,g0,gtilde")? {
            records.push(ExactRecord::evaluate(&p, &e)?);
        }
        if dp {
            let mut r = ExactRecord::evaluate(&PolicyKind::G0, &e)?;
            r.policy = "centralized".into();
            r.cost = centralized_dp(&e)?.value;
            records.push(r);
        }
    }
    emit(&values, &records)?;
    Ok(Verdict::Pass)
}

fn steady(common: &Common, cap: usize) -> Result<Verdict, Error> {
    let values = common.values()?;
    let params = values.params()?;
    let cost = values.cost.as_deref().unwrap_or("linear").parse()?;
    let r = steady_report(&params, &cost, cap)?;
    emit(&values, &[&r])?;
    Ok(if r.j_ghat <= r.j_g0 + 1e-12 {
        Verdict::Pass
    } else {
        Verdict::Violation(format!("ghat cost {} above g0 cost {}", r.j_ghat, r.j_g0))
    })
}

fn compare(common: &Common, coupling: bool, checkpoints: Option<Vec<usize>>) -> Result<Verdict, Error> {
    let values = common.values()?;
    if coupling {
        let cfg = ExperimentConfig { policy: PolicyKind::Ghat, ..values.build()? };
        let checkpoints = checkpoints.unwrap_or_else(|| {
            DEFAULT_CHECKPOINTS.into_iter().filter(|&t| t <= cfg.horizon).collect()
        });
        let report = run_coupling(&CouplingConfig {
            params: cfg.params,
            initial: cfg.initial.clone(),
            cost: cfg.cost.terminal().clone(),
            horizon: cfg.horizon,
            replications: cfg.replications,
            seed: cfg.seed,
            checkpoints,
        });
        let report = match report {
            Err(e @ Error::Replication { .. }) => return Ok(Verdict::Violation(e.to_string())),
            r => r?,
        };
        emit(&values, &[&report])?;
        return Ok(if report.tv_within_bands() {
            Verdict::Pass
        } else {
            Verdict::Violation("marginal laws outside their confidence bands".into())
        });
    }
    let mut summaries = Vec::new();
    for p in policies(&values, "ghat,g0,gtilde")? {
        let v = ConfigValues { policy: Some(p.to_string()), ..values.clone() };
        summaries.push(run_experiment(&v.build()?)?);
    }
    emit(&values, &summaries)?;
    Ok(match summaries.iter().find(|s| !s.passed) {
        None => Verdict::Pass,
        Some(s) => Verdict::Violation(format!("{}: {:?}", s.policy, s.first_failure)),
    })
}

#[derive(Serialize)]
struct T0Row {
    t0: usize,
    count: u64,
}

fn t0(common: &Common) -> Result<Verdict, Error> {
    let values = ConfigValues { policy: Some("ghat".into()), ..common.values()? };
    let cfg = values.build()?;
    let (t0, violations) = sigroute::harness::measure_t0(&cfg)?;
    match format_of(&values)? {
        OutputFormat::Json => emit(
            &values,
            &[serde_json::json!({ "t0": t0, "violations": violations })],
        )?,
        OutputFormat::Csv => {
            let rows: Vec<T0Row> = t0.histogram.iter().map(|(&t0, &count)| T0Row { t0, count }).collect();
            emit(&values, &rows)?;
        }
    }
    Ok(if violations.failing() == 0 {
        Verdict::Pass
    } else {
        Verdict::Violation(format!("{violations:?}"))
    })
}

/// Errors caused by the request rather than by the run.
fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidParams(_)
            | Error::InvalidCost(_)
            | Error::InvalidPmf(_)
            | Error::Io(_)
            | Error::StateCapTooSmall { .. }
            | Error::BudgetExceeded { .. }
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common, mode } => simulate(&common, mode),
        Command::Exact { common, dp } => exact(&common, dp),
        Command::Steady { common, cap } => steady(&common, cap),
        Command::Compare { common, coupling, checkpoints } => compare(&common, coupling, checkpoints),
        Command::T0 { common } => t0(&common),
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Violation(msg)) => {
            eprintln!("invariant violation: {msg}");
            ExitCode::from(1)
        }
        Err(e) if is_usage(&e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
