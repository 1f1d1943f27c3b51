//! `qcmod` command-line front end.
//!
//! Exit codes: 0 success (including unsatisfied inequalities), 2 invalid
//! input, 3 solver did not converge, 1 output failure.

mod commands;
mod output;
mod parse;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use output::Format;

#[derive(Debug, Parser)]
#[command(name = "qcmod", version)]
#[command(about = "Conformal moduli of curve families and ring Q-homeomorphism checks")]
struct Cli {
    /// Seed for every randomized generator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QCMOD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("QCMOD_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let records = match commands::run(cli.command, cli.seed) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            output::write(&records, cli.format, &mut w)?;
            w.flush()
        }),
        None => output::write(&records, cli.format, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    if records.iter().any(|r| !r.converged) {
        eprintln!("error: solver did not converge");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
