//! `dicke`: command-line front end for the Dicke-model spectral solver.

mod commands;
mod config;
mod output;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Command;

use commands::CliError;
use config::{RunConfig, Subcommand};

fn cli() -> Command {
    let mut cmd = Command::new("dicke")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Exact finite-N Dicke model spectra, exceptional points and GME dynamics")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for s in Subcommand::ALL {
        cmd = cmd.subcommand(s.command());
    }
    cmd
}

fn execute() -> Result<(), CliError> {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let sub_kind = Subcommand::from_name(name).expect("registered subcommand");
    let cfg = RunConfig::from_matches(sub_kind, sub)?;
    let text = commands::run(&cfg)?;
    match cfg.raw("output").unwrap_or("-") {
        "-" => std::io::stdout().lock().write_all(text.as_bytes())?,
        path => fs::write(path, text)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dicke: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
