//! boxctl: command-line front end for the quantum-box library.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on numerical or I/O
//! failures (with a JSON error object on stderr). Every successful run
//! writes a manifest.json whose `config` block reproduces the run exactly.

mod args;
mod cmd_dynamics;
mod cmd_spectral;
mod run;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::run::CliError;

fn main() {
    // Clap itself exits with code 2 on bad command lines.
    let cli = Cli::parse();
    if let Err(err) = dispatch(&cli.command) {
        match &err {
            CliError::Usage(message) => eprintln!("error: {message}"),
            _ => eprintln!("{}", err.to_json()),
        }
        std::process::exit(err.exit_code());
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Spectrum(args) => cmd_spectral::spectrum(args),
        Command::Crossings(args) => cmd_spectral::crossings(args),
        Command::Sigma(args) => cmd_spectral::sigma(args),
        Command::Orbit(args) => cmd_spectral::orbit(args),
        Command::Entropy(args) => cmd_spectral::entropy(args),
        Command::Evolve(args) => cmd_dynamics::evolve(args),
        Command::Pump(args) => cmd_dynamics::pump(args),
        Command::Split(args) => cmd_dynamics::split(args),
        Command::Synthesize(args) => cmd_dynamics::synthesize(args),
        Command::Sah2(args) => cmd_spectral::sah2(args),
    }
}
