use std::process::ExitCode;

use clap::Parser;
use squish::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("squish: {e}");
            ExitCode::FAILURE
        }
    }
}
