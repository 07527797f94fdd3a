mod commands;
mod config;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use config::{Cli, CliError, Command, RunConfig};

fn run(cli: Cli) -> Result<String, CliError> {
    let config = RunConfig::resolve(&cli.command, &cli.common)?;
    match &cli.command {
        Command::Count => commands::count(&config),
        Command::Zn => commands::zn(&config),
        Command::Constants => commands::constants(&config),
        Command::Sample { count } => commands::sample(&config, *count),
        Command::Ball {
            t0,
            sweep,
            method,
            draws,
        } => commands::ball(&config, t0, sweep.as_deref(), *method, *draws),
        Command::Asymptotics => commands::asymptotics(&config),
        Command::Verify => {
            let (out, failed) = verify::verify(&config)?;
            println!("{out}");
            if failed > 0 {
                return Err(CliError::VerifyFailed(failed));
            }
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            if !out.is_empty() {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("arborlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
