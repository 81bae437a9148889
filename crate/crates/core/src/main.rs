use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use robust_ts::harness::{self, RunConfig, Status};

#[derive(Parser)]
#[command(
    name = "robust-ts",
    version,
    about = "Robust Poisson log-linear autoregression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a series read from the configured `input` CSV
    Fit(Common),
    /// Simulate, hide and contaminate a series
    Simulate(Common),
    /// Repeated simulate-and-fit runs with box-plot statistics
    Experiment(Common),
    /// Tabulate the scalar shrinkage map and its energy
    ProxCurve(Common),
}

#[derive(Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed (overrides `seed`)
    #[arg(long)]
    seed: Option<u64>,
}

fn load(common: &Common) -> robust_ts::Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(path) => harness::parse_config(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((cfg, out))
}

type Handler = fn(&RunConfig, &std::path::Path) -> robust_ts::Result<Status>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, Handler) = match &cli.command {
        Command::Fit(c) => (c, harness::cmd_fit),
        Command::Simulate(c) => (c, harness::cmd_simulate),
        Command::Experiment(c) => (c, harness::cmd_experiment),
        Command::ProxCurve(c) => (c, harness::cmd_prox_curve),
    };
    let status = load(common).and_then(|(cfg, out)| run(&cfg, &out));
    match status {
        Ok(s) => ExitCode::from(s.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::InputError.code() as u8)
        }
    }
}
