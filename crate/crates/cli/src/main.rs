use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use oseen2d_cli::commands::{self, Job};
use oseen2d_cli::{CliError, Command, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Solve,
    Linear,
    Norms,
    Verify,
    Sweep,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Solve => Command::Solve,
            Sub::Linear => Command::Linear,
            Sub::Norms => Command::Norms,
            Sub::Verify => Command::Verify,
            Sub::Sweep => Command::Sweep,
        }
    }
}

/// Solver and estimate laboratory for 2D flow past a uniform stream.
#[derive(Debug, Parser)]
#[command(name = "oseen2d", version)]
struct Args {
    command: Sub,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Forcing seed; overrides `[forcing] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Summary CSV from `verify` holding the C0 estimate.
    #[arg(long)]
    gate: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.forcing.seed = seed;
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let job = Job { cfg: &cfg, out: &out, gate: args.gate.as_deref() };
    let summary = commands::run(args.command.into(), &job)?;
    if !args.quiet {
        for (k, v) in summary {
            println!("{k} = {v}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oseen2d: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
