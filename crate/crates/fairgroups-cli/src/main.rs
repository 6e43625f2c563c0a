//! Batch front end: generate -> partition -> evaluate -> transfer ->
//! debias -> report, each step reading files produced by earlier steps.
//!
//! Results go to standard output as JSON; progress and warnings go to
//! standard error. Every run writes a manifest (command, seed, input
//! digests, outputs) into the output directory. Exit codes: 0 success,
//! 1 validation error, 2 infeasible search.

mod args;
mod commands;
mod manifest;

use clap::Parser;

fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            let (code, tag) = if err.is_infeasible() {
                (2u8, "infeasible")
            } else {
                (1u8, "validation")
            };
            eprintln!("error[{tag}]: {err}");
            std::process::ExitCode::from(code)
        }
    }
}
