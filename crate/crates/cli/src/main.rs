//! `rankguard`: build polar codes, certify published coordinate sets, pick
//! low-leakage sets and simulate the scheme. Indices on the command line and
//! in every file are 1-based.

mod commands;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::*;
use error::{CliError, CliResult};

/// Exact leakage certificates for partly published polar codewords.
///
/// All coordinate indices are 1-based. RANKGUARD_THREADS sets the worker
/// count (0 or unset = one per core).
#[derive(Parser, Debug)]
#[command(name = "rankguard", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Design a polar code and write its descriptor.
    Construct(ConstructArgs),
    /// Certify the leakage of a published set and write the certificate.
    Certify(CertifyArgs),
    /// Apply a certificate's extractor to a codeword.
    Extract(ExtractArgs),
    /// Choose k coordinates to publish.
    Select(SelectArgs),
    /// Compare greedy and optimal selection for k = 1..=K as CSV.
    Sweep(SweepArgs),
    /// Run a seeded transmission experiment from a config file.
    Simulate(SimulateArgs),
    /// Re-audit a stored certificate against its code.
    Verify(VerifyArgs),
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("RANKGUARD_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("RANKGUARD_THREADS must be a count, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} workers: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match &cli.command {
        Cmd::Construct(a) => construct(a),
        Cmd::Certify(a) => certify(a),
        Cmd::Extract(a) => extract(a),
        Cmd::Select(a) => select(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Simulate(a) => simulate(a),
        Cmd::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
