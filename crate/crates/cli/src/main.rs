use std::process::ExitCode;

use clap::Parser;
use dualdomain_cli::app::{run, Cli};

fn main() -> ExitCode {
    // usage errors exit with status 2 inside `parse`
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
