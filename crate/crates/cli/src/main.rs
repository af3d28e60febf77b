use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = secrelay_cli::Cli::parse();
    match secrelay_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
