use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use syk_core::error::{Error, Result};
use syk_core::runner::{execute, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "syk",
    version,
    about = "SYK entanglement and autocorrelation ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw Hamiltonians and report Tr(H^2)/D against the target variance.
    Build(RunArgs),
    /// Entanglement-entropy trajectories.
    EvolveEe(RunArgs),
    /// Two-point autocorrelation trajectories.
    Autocorr(RunArgs),
    /// Variance-matched Gaussian ensembles in place of each model curve.
    RmtBaseline(RunArgs),
    /// Page and Marchenko-Pastur reference values.
    Bounds(RunArgs),
    /// Eigenstate entanglement survey of random matrices.
    Survey(RunArgs),
    /// Saturation verdicts across sparseness values.
    Sweep(RunArgs),
    /// Fit saved trajectories.
    Fit(RunArgs),
    /// Plot-ready bundle from saved trajectories.
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: out/<name>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the realization count.
    #[arg(long)]
    realizations: Option<usize>,
    /// Shrink every system to at most this many qubits.
    #[arg(long)]
    max_qubits: Option<usize>,
}

impl Cmd {
    fn split(self) -> (Command, RunArgs) {
        match self {
            Cmd::Build(a) => (Command::Build, a),
            Cmd::EvolveEe(a) => (Command::EvolveEe, a),
            Cmd::Autocorr(a) => (Command::Autocorr, a),
            Cmd::RmtBaseline(a) => (Command::RmtBaseline, a),
            Cmd::Bounds(a) => (Command::Bounds, a),
            Cmd::Survey(a) => (Command::Survey, a),
            Cmd::Sweep(a) => (Command::Sweep, a),
            Cmd::Fit(a) => (Command::Fit, a),
            Cmd::Report(a) => (Command::Report, a),
        }
    }
}

fn run(cmd: Command, args: RunArgs) -> Result<PathBuf> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(q) = args.max_qubits {
        cfg = cfg.reduced(q)?;
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    if let Some(j) = args.jobs {
        cfg.jobs = j;
    }
    if let Some(r) = args.realizations {
        cfg.set_realizations(r);
    }
    cfg.validate()?;
    let out = args
        .out
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    let manifest = execute(cmd, &cfg, &out)?;
    for f in &manifest.outputs {
        println!("{}", out.join(f).display());
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = cli.command.split();
    match run(cmd, args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("syk {}: {e}", cmd.name());
            ExitCode::from(exit_byte(&e))
        }
    }
}

fn exit_byte(e: &Error) -> u8 {
    e.exit_code() as u8
}
