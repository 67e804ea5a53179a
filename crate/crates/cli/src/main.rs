mod args;
mod commands;
mod error;
mod input;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let args = cli.command.args().resolve()?;
    let format = args.format.unwrap_or_else(|| cli.command.default_format());
    if args.jobs == Some(0) {
        return Err(CliError::config("--jobs must be at least 1"));
    }
    let output = match cli.command {
        Command::Simulate(_) => commands::simulate(&args, format),
        Command::Endemic(_) => commands::endemic(&args, format),
        Command::Asymptotic(_) => commands::asymptotic(&args, format),
        Command::Threshold(_) => commands::threshold(&args, format),
        Command::Scalar(_) => commands::scalar(&args, format),
    }?;
    match &args.out {
        Some(path) => std::fs::write(path, output).map_err(CliError::io),
        None => std::io::stdout().lock().write_all(output.as_bytes()).map_err(CliError::io),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NETEPI_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
