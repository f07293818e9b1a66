mod cli;
mod commands;
mod config;
mod files;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use crate::cli::{Cli, Command};

fn thread_count(flag: Option<usize>) -> Result<usize> {
    if let Ok(v) = std::env::var("WMMD_PU_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("WMMD_PU_THREADS must be a positive integer, got '{v}'"))?;
        anyhow::ensure!(n > 0, "WMMD_PU_THREADS must be a positive integer, got '{v}'");
        return Ok(n);
    }
    match flag {
        Some(0) => anyhow::bail!("--threads must be at least 1"),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

#[cfg(feature = "parallel")]
fn init_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting the thread pool")
}

#[cfg(not(feature = "parallel"))]
fn init_threads(n: usize) -> Result<()> {
    log::debug!("built without the parallel feature; ignoring {n} threads");
    Ok(())
}

fn run() -> Result<()> {
    let args = config::merge_config(std::env::args_os().collect())?;
    let cli = Cli::parse_from(args);
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    init_threads(thread_count(cli.threads)?)?;

    match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::EstimatePrior(a) => commands::estimate_prior(a),
        Command::Bench(a) => commands::bench(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
