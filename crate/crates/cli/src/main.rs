use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use otrates_cli::{run_config, CliError, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "otrates", version, about = "Entropic transport convergence-rate sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form Gaussian sweep.
    Gaussian(RunArgs),
    /// Sinkhorn sweep on discretized Gaussians.
    Sinkhorn(RunArgs),
    /// Sinkhorn sweep plus the first-order cost expansion check.
    Expansion(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` field.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use small grids for fast smoke runs.
    #[arg(long)]
    quick: bool,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("OTRATES_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Validation(format!("OTRATES_THREADS: expected a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("OTRATES_THREADS: {e}")))
}

fn execute(mode: Mode, args: &RunArgs) -> Result<i32, CliError> {
    configure_threads()?;
    let config = ExperimentConfig::load(&args.config)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output.clone())
        .ok_or_else(|| CliError::Validation("output: pass --out or set `output` in the config".into()))?;
    let outcome = run_config(&config, mode, args.quick, &out)?;
    print!("{}", outcome.report);
    println!("wrote {}", out.display());
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Gaussian(a) => (Mode::Gaussian, a),
        Command::Sinkhorn(a) => (Mode::Sinkhorn, a),
        Command::Expansion(a) => (Mode::Expansion, a),
    };
    let code = execute(mode, args).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
