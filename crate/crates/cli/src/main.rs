//! Command-line front end for the experiment harness.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use ldp_sgd::bootstrap::BlockSpec;
use ldp_sgd::bootstrap::MultiplierLaw;
use ldp_sgd::rng::{substream, STREAM_DATA};
use ldp_sgd::schedule::{check_base_case, verify_sum_identity, LearningRateSchedule};
use ldp_sgd::trace::geometric_checkpoints;
use ldp_sgd_cli::report::{merged_rows_csv, render_table};
use ldp_sgd_cli::runner::{trajectory_csv, Experiment, ModelInstance};
use ldp_sgd_cli::spec::{
    DataLaw, ExperimentSpec, Method, ModelSpec, OutputSpec, ScheduleSpec,
};

#[derive(Parser)]
#[command(
    name = "ldp-sgd",
    version,
    about = "Coverage experiments for locally private SGD with bootstrap confidence intervals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo coverage experiment.
    Run(RunArgs),
    /// Export the estimate and its intervals along one SGD run.
    Trajectory(TrajectoryArgs),
    /// Run both interval methods on shared SGD runs and tabulate them.
    Compare(CompareArgs),
    /// Check the step-size schedule conditions over a parameter grid.
    CheckConditions(CheckConditionsArgs),
    /// Spill model samples to a CSV file for later replay.
    GenData(GenDataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Profile {
    /// n = 10^5, M = 200: minutes on a laptop.
    Desk,
    /// n = 10^6, M = 500: the published table scale.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Quantile,
    Quantreg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MultiplierKind {
    /// Uniform on (-sqrt(3), sqrt(3)).
    Uniform,
    /// Signs +1/-1 with equal probability.
    Rademacher,
}

impl MultiplierKind {
    fn law(self) -> MultiplierLaw {
        match self {
            MultiplierKind::Uniform => MultiplierLaw::UniformSqrt3,
            MultiplierKind::Rademacher => MultiplierLaw::Rademacher,
        }
    }
}

#[derive(Args)]
struct SpecArgs {
    /// JSON experiment spec; the flags below override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,

    /// Baseline scale when no spec file is given.
    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    profile: Profile,

    #[arg(long, value_enum)]
    model: Option<ModelKind>,

    /// Quantile level tau.
    #[arg(long)]
    tau: Option<f64>,

    /// Comma-separated true regression coefficients (quantreg only).
    #[arg(long)]
    beta_star: Option<String>,

    /// SGD run length per replication.
    #[arg(long)]
    n: Option<u64>,

    /// Per-datum privacy budget.
    #[arg(long, conflicts_with = "no_noise")]
    eps: Option<f64>,

    /// Run without privatization noise.
    #[arg(long)]
    no_noise: bool,

    /// Step-size exponent gamma in (0.5, 1).
    #[arg(long)]
    gamma: Option<f64>,

    /// Step-size scale c.
    #[arg(long)]
    c: Option<f64>,

    /// Block-length exponent beta: blocks of floor(n^beta).
    #[arg(long, conflicts_with = "block_length")]
    beta: Option<f64>,

    /// Explicit block length.
    #[arg(long)]
    block_length: Option<u64>,

    /// Bootstrap replicate count B.
    #[arg(long = "B")]
    bootstrap_replicates: Option<usize>,

    /// Tail level alpha; intervals have nominal coverage 1 - 2*alpha.
    #[arg(long)]
    alpha: Option<f64>,

    /// Bootstrap multiplier law.
    #[arg(long, value_enum)]
    multiplier: Option<MultiplierKind>,

    /// Monte Carlo replication count M.
    #[arg(long)]
    reps: Option<u64>,

    /// Master seed; replication r derives its streams from (seed, r).
    #[arg(long)]
    seed: Option<u64>,

    /// Interval method.
    #[arg(long, value_enum)]
    method: Option<Method>,

    /// Comma-separated starting iterate (defaults to the origin).
    #[arg(long)]
    theta0: Option<String>,
}

impl SpecArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentSpec> {
        let mut spec = match &self.spec {
            Some(path) => ExperimentSpec::from_file(path)?,
            None => {
                let (n, reps) = match self.profile {
                    Profile::Desk => (100_000, 200),
                    Profile::Paper => (1_000_000, 500),
                };
                ExperimentSpec {
                    model: ModelSpec::Quantile { tau: 0.5, law: DataLaw::StandardNormal },
                    method: Method::BlockBootstrap,
                    n,
                    privacy_epsilon: Some(1.0),
                    schedule: ScheduleSpec::default(),
                    bootstrap: Default::default(),
                    replications: reps,
                    master_seed: 1,
                    theta0: None,
                    output: OutputSpec::default(),
                }
            }
        };

        if let Some(kind) = self.model {
            spec.model = match kind {
                ModelKind::Quantile => ModelSpec::Quantile {
                    tau: self.tau.unwrap_or(0.5),
                    law: DataLaw::StandardNormal,
                },
                ModelKind::Quantreg => ModelSpec::Quantreg {
                    tau: self.tau.unwrap_or(0.5),
                    beta_star: match &self.beta_star {
                        Some(text) => parse_vector(text)?,
                        None => vec![0.0, 0.0, 1.0, -1.0],
                    },
                },
            };
        } else if let Some(tau) = self.tau {
            match &mut spec.model {
                ModelSpec::Quantile { tau: t, .. } => *t = tau,
                ModelSpec::Quantreg { tau: t, .. } => *t = tau,
            }
        }
        if let Some(n) = self.n {
            spec.n = n;
        }
        if let Some(eps) = self.eps {
            spec.privacy_epsilon = Some(eps);
        }
        if self.no_noise {
            spec.privacy_epsilon = None;
        }
        if let Some(gamma) = self.gamma {
            spec.schedule.gamma = gamma;
        }
        if let Some(c) = self.c {
            spec.schedule.c = c;
        }
        if let Some(beta) = self.beta {
            spec.bootstrap.block = BlockSpec::Exponent(beta);
        }
        if let Some(l) = self.block_length {
            spec.bootstrap.block = BlockSpec::Length(l);
        }
        if let Some(b) = self.bootstrap_replicates {
            spec.bootstrap.replicates = b;
        }
        if let Some(alpha) = self.alpha {
            spec.bootstrap.alpha = alpha;
        }
        if let Some(mult) = self.multiplier {
            spec.bootstrap.multiplier = mult.law();
        }
        if let Some(reps) = self.reps {
            spec.replications = reps;
        }
        if let Some(seed) = self.seed {
            spec.master_seed = seed;
        }
        if let Some(method) = self.method {
            spec.method = method;
        }
        if let Some(text) = &self.theta0 {
            spec.theta0 = Some(parse_vector(text)?);
        }
        Ok(spec)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    spec: SpecArgs,

    /// Worker threads for the replication fan-out (default: all cores).
    #[arg(long)]
    workers: Option<usize>,

    /// Write per-replication rows to this CSV file.
    #[arg(long)]
    rows_out: Option<PathBuf>,

    /// Write the aggregate header to this JSON file.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    spec: SpecArgs,

    #[arg(long)]
    workers: Option<usize>,

    /// Write the merged per-replication rows (both methods) to this CSV file.
    #[arg(long)]
    rows_out: Option<PathBuf>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    spec: SpecArgs,

    /// Comma-separated checkpoint iterations (default: geometric grid
    /// from 10 to n).
    #[arg(long)]
    checkpoints: Option<String>,

    /// Write the trajectory table to this CSV file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckConditionsArgs {
    /// Comma-separated step-size scales.
    #[arg(long, default_value = "1.0")]
    c: String,

    /// Comma-separated step-size exponents.
    #[arg(long, default_value = "0.51")]
    gamma: String,

    /// Comma-separated curvature eigenvalues.
    #[arg(long, default_value = "1.0")]
    lambda: String,

    /// Largest index for the step-size sum identity residual.
    #[arg(long, default_value_t = 10_000)]
    sum_b: u64,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Quantile)]
    model: ModelKind,

    #[arg(long, default_value_t = 0.5)]
    tau: f64,

    /// Comma-separated true regression coefficients (quantreg only).
    #[arg(long)]
    beta_star: Option<String>,

    /// Number of rows to generate.
    #[arg(long)]
    n: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Destination CSV file.
    #[arg(long)]
    out: PathBuf,
}

fn parse_vector(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .with_context(|| format!("cannot parse {part:?} as a number"))
        })
        .collect()
}

fn parse_u64_list(text: &str) -> anyhow::Result<Vec<u64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .with_context(|| format!("cannot parse {part:?} as an index"))
        })
        .collect()
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let mut spec = args.spec.resolve()?;
    if let Some(path) = args.rows_out {
        spec.output.rows = Some(path);
    }
    if let Some(path) = args.summary_out {
        spec.output.summary = Some(path);
    }
    let experiment = Experiment::new(spec)?;
    if let Some(warning) = experiment.schedule_warning() {
        eprintln!("warning: {warning}");
    }
    let report = experiment.run(args.workers)?;
    report.write_outputs()?;
    print!("{}", report.table());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    let spec = args.spec.resolve()?;
    let experiment = Experiment::new(spec)?;
    if let Some(warning) = experiment.schedule_warning() {
        eprintln!("warning: {warning}");
    }
    let (bb, bm) = experiment.run_compare(args.workers)?;
    if let Some(path) = args.rows_out {
        fs::write(path, merged_rows_csv(&[&bb, &bm])?)?;
    }
    print!("{}", render_table(&[&bb, &bm]));
    Ok(())
}

fn cmd_trajectory(args: TrajectoryArgs) -> anyhow::Result<()> {
    let spec = args.spec.resolve()?;
    let checkpoints = match &args.checkpoints {
        Some(text) => parse_u64_list(text)?,
        None => geometric_checkpoints(spec.n),
    };
    let experiment = Experiment::new(spec)?;
    if let Some(warning) = experiment.schedule_warning() {
        eprintln!("warning: {warning}");
    }
    let rows = experiment.trajectory(&checkpoints)?;
    let csv = trajectory_csv(&rows)?;
    match args.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_check_conditions(args: CheckConditionsArgs) -> anyhow::Result<()> {
    let cs = parse_vector(&args.c)?;
    let gammas = parse_vector(&args.gamma)?;
    let lambdas = parse_vector(&args.lambda)?;
    println!(
        "{:<8}{:<8}{:<8}{:<12}{:<7}{:<12}{:<12}sum_residual",
        "c", "gamma", "lambda", "base_index", "holds", "lhs", "rhs"
    );
    for &c in &cs {
        for &gamma in &gammas {
            let schedule = LearningRateSchedule::new(c, gamma)?;
            for &lambda in &lambdas {
                let check = check_base_case(&schedule, lambda)?;
                let residual = verify_sum_identity(&schedule, lambda, args.sum_b)?;
                println!(
                    "{:<8}{:<8}{:<8}{:<12}{:<7}{:<12.6}{:<12.6}{:.3e}",
                    c, gamma, lambda, check.base_index, check.holds, check.lhs, check.rhs,
                    residual
                );
            }
        }
    }
    Ok(())
}

fn cmd_gen_data(args: GenDataArgs) -> anyhow::Result<()> {
    let model_spec = match args.model {
        ModelKind::Quantile => {
            ModelSpec::Quantile { tau: args.tau, law: DataLaw::StandardNormal }
        }
        ModelKind::Quantreg => ModelSpec::Quantreg {
            tau: args.tau,
            beta_star: match &args.beta_star {
                Some(text) => parse_vector(text)?,
                None => vec![0.0, 0.0, 1.0, -1.0],
            },
        },
    };
    let model = ModelInstance::build(&model_spec)?;
    let mut stream = model.stream(substream(args.seed, &[0, STREAM_DATA]));
    ldp_sgd::data::spill_csv(&mut *stream, args.n, &args.out)?;
    eprintln!("wrote {} rows to {}", args.n, args.out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Trajectory(args) => cmd_trajectory(args),
        Command::CheckConditions(args) => cmd_check_conditions(args),
        Command::GenData(args) => cmd_gen_data(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(ldp_sgd_cli::exit_code(&err))
        }
    }
}
