use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use levy_memory::harness::checks::run_acceptance;
use levy_memory::harness::{run, ExperimentConfig, Subcommand};
use levy_memory::Error;

#[derive(Parser)]
#[command(
    name = "levy-memory",
    version,
    about = "Nonlocal memory-problem solvers, studies and checks"
)]
struct Cli {
    /// Run the acceptance suite; exits 4 if any check fails.
    #[arg(long)]
    check: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Semilinear elliptic solve with estimate report.
    SolveElliptic(RunArgs),
    /// Weighted linear parabolic solve with energy ledger.
    SolveParabolic(RunArgs),
    /// Fixed-point solve of the memory problem.
    SolveMemory(RunArgs),
    /// Fractional-Poisson convergence table.
    StudyFracpoisson(RunArgs),
    /// Rescaled kernels against the heat equation.
    StudyKernelLimit(RunArgs),
    /// Uniqueness indicator against Picard behaviour over T.
    StudyThreshold(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; defaults apply to every missing key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (falls back to `output.dir`, then `out/<subcommand>`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn check() -> ExitCode {
    let outcomes = run_acceptance();
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    }
}

fn execute(sub: Subcommand, args: &RunArgs) -> Result<(), Error> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(sub.name()));
    let artifacts = run(sub, &cfg)?;
    for path in artifacts.write(&out)? {
        println!("wrote {}", path.display());
    }
    match artifacts.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.check {
        return check();
    }
    let Some(command) = cli.command else {
        eprintln!("nothing to do: pass a subcommand or --check (see --help)");
        return ExitCode::from(2);
    };
    let (sub, args) = match &command {
        Command::SolveElliptic(a) => (Subcommand::SolveElliptic, a),
        Command::SolveParabolic(a) => (Subcommand::SolveParabolic, a),
        Command::SolveMemory(a) => (Subcommand::SolveMemory, a),
        Command::StudyFracpoisson(a) => (Subcommand::StudyFracPoisson, a),
        Command::StudyKernelLimit(a) => (Subcommand::StudyKernelLimit, a),
        Command::StudyThreshold(a) => (Subcommand::StudyThreshold, a),
    };
    match execute(sub, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
