use std::process::ExitCode;

use clap::Parser;
use diffusion_gof_cli::Cli;

fn main() -> ExitCode {
    match diffusion_gof_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
