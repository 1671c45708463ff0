use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use phimv_cli::{all_passed, eval_matrix, run, write_rows, BenchConfig, Experiment, Format};
use phimv_core::mtx::read_matrix_market;
use phimv_core::params::{DEFAULT_DEGREE, DEFAULT_DELTA, DEFAULT_TOL};
use phimv_core::select_parameters;

#[derive(Parser)]
#[command(name = "phimv", version, about = "Linear combinations of phi-function actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a desk-scale experiment and print its table.
    Bench(BenchArgs),
    /// Scaling and shift parameters.
    Params {
        #[command(subcommand)]
        command: ParamsCommand,
    },
    /// Evaluate one combination on a Matrix Market matrix with random vectors.
    Eval(EvalArgs),
}

#[derive(Subcommand)]
enum ParamsCommand {
    /// Print the selected parameters for a matrix.
    Inspect {
        matrix: PathBuf,
        #[command(flatten)]
        select: SelectArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Chebyshev,
    Lowrank,
    Adr,
    Gallery,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Chebyshev => Experiment::Chebyshev,
            ExperimentArg::Lowrank => Experiment::Lowrank,
            ExperimentArg::Adr => Experiment::Adr,
            ExperimentArg::Gallery => Experiment::Gallery,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    /// Taylor degree used by the parameter search.
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    m: usize,
    /// Overflow guard fraction.
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    experiment: ExperimentArg,
    /// Problem size override.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Evaluator tolerance (experiment default when omitted).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 2025)]
    seed: u64,
    /// Evaluate gallery matrices concurrently.
    #[arg(long)]
    parallel: bool,
    /// Include the slow cells without an acceptance bound.
    #[arg(long)]
    full: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EvalArgs {
    matrix: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 3)]
    p: usize,
    #[arg(long, default_value_t = 2025)]
    seed: u64,
    #[command(flatten)]
    select: SelectArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn bench(args: BenchArgs) -> Result<bool> {
    let mut cfg = BenchConfig::new(args.experiment.into());
    cfg.size = args.size;
    cfg.p = args.p;
    cfg.tol = args.tol;
    cfg.m = args.m;
    cfg.delta = args.delta;
    cfg.seed = args.seed;
    cfg.parallel = args.parallel;
    cfg.full = args.full;
    cfg.out = args.output.out;
    cfg.format = args.output.format.into();
    let rows = run(&cfg)?;
    write_rows(&rows, cfg.out.as_deref(), cfg.format)?;
    Ok(all_passed(&rows))
}

fn inspect(matrix: PathBuf, select: SelectArgs) -> Result<bool> {
    let a = read_matrix_market(&matrix)?;
    let p = select_parameters(&a, select.m, select.tol, select.delta)
        .with_context(|| format!("selecting parameters for {}", matrix.display()))?;
    println!("s = {:e}", p.s);
    println!("xi = {:e}", p.xi);
    println!("s0 = {:e}", p.s0);
    println!("f_min = {:e}", p.f_min);
    println!("m = {}", p.m);
    println!("r = {}", p.r);
    Ok(true)
}

fn eval(args: EvalArgs) -> Result<bool> {
    let a = read_matrix_market(&args.matrix)?;
    let s = &args.select;
    let row = eval_matrix(&a, args.t, args.alpha, args.p, s.tol, s.m, s.delta, args.seed)?;
    write_rows(&[row], args.output.out.as_deref(), args.output.format.into())?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Bench(args) => bench(args),
        Command::Params { command: ParamsCommand::Inspect { matrix, select } } => inspect(matrix, select),
        Command::Eval(args) => eval(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
