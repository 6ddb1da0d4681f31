use std::process::ExitCode;

use clap::Parser;
use tracing_subscriber::EnvFilter;

mod args;
mod commands;
mod output;

use args::{Cli, Command, PoolCommand};

/// Failure classes mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, malformed inputs or invalid configuration.
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        match e.downcast_ref::<fedsched_core::Error>() {
            Some(fedsched_core::Error::Config(_) | fedsched_core::Error::InvalidArgument(_)) => Failure::Usage(e),
            _ => Failure::Runtime(e),
        }
    }
}

fn main() -> ExitCode {
    let filter = EnvFilter::try_from_env("FEDSCHED_LOG").unwrap_or_else(|_| EnvFilter::new("warn"));
    tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).init();

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Pool { command: PoolCommand::Generate(a) } => commands::pool_generate(a, cli.seed),
        Command::Pool { command: PoolCommand::Select(a) } => commands::pool_select(a, cli.seed),
        Command::Subsets(a) => commands::subsets(a, cli.seed),
        Command::Simulate(a) => commands::simulate(a, cli.seed),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
