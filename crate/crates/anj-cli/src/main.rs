//! Command-line front end: configuration ingestion, experiment
//! orchestration, and CSV emission.
//!
//! Exit codes: 0 on success, 1 for usage/configuration problems, 2 when the
//! numerics themselves fail.

mod commands;
mod config;
mod output;

use anj::error::Error;
use clap::{Args, Parser, Subcommand};
use config::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "anj",
    version,
    about = "Secrecy analysis of a wireless-powered full-duplex cooperative jammer",
    long_about = "Closed-form secrecy outage / non-zero secrecy capacity for an \
                  accumulate-and-jam cooperative jammer with discretized energy storage, \
                  a half-duplex benchmark, an infinite-capacity bound, a validating \
                  Monte Carlo simulator, and figure-reproduction sweeps."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one configuration key (repeatable), e.g. --set p_s_dbm=25.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output file ("-" or absent for stdout; a directory for `reproduce`).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Monte Carlo seed override.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Monte Carlo block-count override.
    #[arg(long, value_name = "N")]
    blocks: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form metrics for every variant across the sweep.
    Analyze(CommonArgs),
    /// Monte Carlo estimates with closed forms side by side.
    Simulate(CommonArgs),
    /// Exhaustive jamming-power search per sweep point.
    #[command(name = "optimize-pj")]
    OptimizePj(CommonArgs),
    /// Emit the data series behind one of the reference figures.
    Reproduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Figure number, 2 through 8.
        #[arg(long, value_name = "N")]
        figure: u32,
    },
}

fn resolve_config(args: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => {
            let body = std::fs::read_to_string(path).map_err(|e| {
                Error::Usage(format!("cannot read config '{}': {e}", path.display()))
            })?;
            ExperimentConfig::from_ini(&body)?
        }
        None => ExperimentConfig::default(),
    };
    for pair in &args.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got '{pair}'")))?;
        cfg.apply(key.trim(), value.trim())?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(blocks) = args.blocks {
        cfg.blocks = blocks;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Analyze(args) => {
            let cfg = resolve_config(args)?;
            let csv = commands::cmd_analyze(&cfg)?;
            output::emit(args.out.as_deref(), &csv)
                .map_err(|e| Error::Usage(format!("cannot write output: {e}")))?;
        }
        Command::Simulate(args) => {
            let cfg = resolve_config(args)?;
            let csv = commands::cmd_simulate(&cfg)?;
            output::emit(args.out.as_deref(), &csv)
                .map_err(|e| Error::Usage(format!("cannot write output: {e}")))?;
        }
        Command::OptimizePj(args) => {
            let cfg = resolve_config(args)?;
            let csv = commands::cmd_optimize_pj(&cfg)?;
            output::emit(args.out.as_deref(), &csv)
                .map_err(|e| Error::Usage(format!("cannot write output: {e}")))?;
        }
        Command::Reproduce { common, figure } => {
            let cfg = resolve_config(common)?;
            let files = commands::cmd_reproduce(&cfg, *figure)?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|e| {
                Error::Usage(format!("cannot create output dir '{}': {e}", dir.display()))
            })?;
            for (name, content) in files {
                let path = dir.join(&name);
                std::fs::write(&path, content)
                    .map_err(|e| Error::Usage(format!("cannot write '{}': {e}", path.display())))?;
                eprintln!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, anything else is usage
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                // caller mistakes: bad flags, bad config, bad domain
                Error::Usage(_) | Error::Domain(_) => ExitCode::from(1),
                // genuine numerical failures
                _ => ExitCode::from(2),
            }
        }
    }
}
