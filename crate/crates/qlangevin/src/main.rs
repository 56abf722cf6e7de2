use std::process::ExitCode;

use clap::Parser;
use qlangevin::cli::Cli;
use qlangevin::commands::execute;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qlangevin {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
