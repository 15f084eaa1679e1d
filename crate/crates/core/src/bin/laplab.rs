use std::process::ExitCode;

use clap::Parser;
use laplacian_lab::cli::{exit_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("laplab: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
