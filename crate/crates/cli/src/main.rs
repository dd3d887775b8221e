//! Command-line runner: parse flags, build the parameter table, dispatch, write the report.
//!
//! Exit codes: 0 success, 1 unwritable output, 2 precondition failure, 3 numerical failure
//! (the partial report is still written).

mod commands;
mod params;

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use roughpower::report::Format;
use roughpower::Error;

use crate::commands::{run, COMMANDS};
use crate::params::Params;

#[derive(Parser, Debug)]
#[command(name = "roughpower", version, about = "Refinement studies for rough power nonlinearities")]
struct Cli {
    /// norms, evolve, scan-abs, scan-nonlinear, scan-heat, scan-nls, witness or selftest
    command: String,
    /// toml file; top-level keys and the section named after the command are read
    #[arg(long)]
    config: Option<PathBuf>,
    /// override one parameter, e.g. --set s=1.25,1.75 --set n=2^12..2^15
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// report path; stdout when absent
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// worker threads; all cores when absent
    #[arg(long)]
    jobs: Option<usize>,
}

const EXIT_OUTPUT: u8 = 1;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) | Error::Unresolved(_) => EXIT_PRECONDITION,
        Error::Numerical(_) | Error::Range { .. } => EXIT_NUMERICAL,
    }
}

fn params(cli: &Cli) -> Result<Params, Error> {
    if !COMMANDS.contains(&cli.command.as_str()) {
        return Err(Error::Precondition(format!("unknown command `{}`; expected one of {}", cli.command, COMMANDS.join(", "))));
    }
    let mut p = match &cli.config {
        Some(path) => Params::from_config(path, &cli.command)?,
        None => Params::default(),
    };
    for s in &cli.set {
        p.set(s)?;
    }
    Ok(p)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format: Format = match cli.format.parse() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_PRECONDITION);
        }
    };
    // the output must be writable before any compute starts
    let sink: Option<File> = match &cli.output {
        Some(path) => match OpenOptions::new().write(true).create(true).truncate(false).open(path) {
            Ok(f) => Some(f),
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_OUTPUT);
            }
        },
        None => None,
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_PRECONDITION);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(EXIT_PRECONDITION);
        }
    }
    let outcome = match params(&cli).and_then(|p| run(&cli.command, &p, cli.seed)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let bytes = match outcome.report.serialize(format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let written = match sink {
        Some(mut f) => f.set_len(0).and_then(|_| f.write_all(&bytes)),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: writing the report failed: {e}");
        return ExitCode::from(EXIT_OUTPUT);
    }
    // summaries go to stderr when the report itself is on stdout
    for line in &outcome.summary {
        if cli.output.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    match outcome.failure {
        Some(f) => {
            eprintln!("numerical failure: {f}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        None => ExitCode::SUCCESS,
    }
}
