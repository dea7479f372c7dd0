//! `cayfib`: command-line front end of the verification toolkit.
//!
//! Exit status is 0 when every check passes, 1 when any check fails and 2
//! when the input cannot be used.

mod args;
mod commands;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match commands::dispatch(&cli.command, cli.tol_scale) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    let json = report.to_json_pretty();
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if cli.json {
        println!("{json}");
    } else {
        print!("{}", report.to_text());
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
