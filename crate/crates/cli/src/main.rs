mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use config::Merged;
use error::{CliError, CliResult};

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("HESTON_FX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("HESTON_FX_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let merged = Merged::load(&cli.params)?;
    let mut deferred = None;
    let report = match &cli.command {
        Command::Price(a) => commands::price(&merged, a)?,
        Command::Greeks(a) => commands::greeks_cmd(&merged, a)?,
        Command::Density(a) => commands::density(&merged, a)?,
        Command::Fft(a) => commands::fft(&merged, a)?,
        Command::Simulate(a) => commands::simulate_cmd(&merged, a)?,
        Command::Feller => commands::feller(&merged)?,
        Command::ForwardVol(a) => commands::forward_vol(&merged, a)?,
        Command::Calibrate(a) => {
            let (report, failure) = commands::calibrate(&merged, a)?;
            deferred = failure;
            report
        }
        Command::SmileSweep(a) => commands::smile_sweep(&merged, a)?,
    };
    output::emit(&report, cli.io.format, cli.io.output.as_deref())?;
    match deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim_end().to_string());
            eprintln!("{}", err.report());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code())
        }
    }
}
