mod args;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;
use cuberoot::ErrorKind;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match run::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numeric => 4,
            })
        }
    }
}
