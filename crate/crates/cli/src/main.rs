//! `kstab`: norms, operator evaluation, the stable-but-not-integrable
//! counterexample and Mercer checks for piecewise kernels.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Options;
use kernel_stability::Error;

const CSV_HELP: &str = "\
CSV outputs:
  norms           quantity,value,approx
  operator        x,value (output samples; with --search, the witness input)
  counterexample  H,l1_partial_sum,opnorm_upper_bound (rationals as p/q)
  gram            x,p_1,...,p_n then one row per point
JSON outputs carry \"schema\": \"1\" and write rationals as \"p/q\" strings.
Exit codes: 0 pass, 1 check failure, 2 usage or parse error.";

#[derive(Debug, Parser)]
#[command(name = "kstab", version, about = "Stability and integrability checks for Mercer kernels built from PSD matrices", after_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    options: Options,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// L1 and (inf,1) norms of a matrix and its kernels
    Norms,
    /// Apply the kernel operator to an input, or search for a worst input
    Operator,
    /// Build the block counterexample and emit its certified series
    Counterexample,
    /// PSD, symmetry and continuity checks
    Verify,
    /// Gram matrix at sample points
    Gram,
}

/// Outcome of a command that ran to completion.
pub enum Outcome {
    Pass,
    CheckFailed,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::CertificateFailure(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.options.resolve().and_then(|options| {
        if let Some(n) = options.workers {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        match cli.command {
            Command::Norms => commands::norms(&options),
            Command::Operator => commands::operator(&options),
            Command::Counterexample => commands::counterexample(&options),
            Command::Verify => commands::verify(&options),
            Command::Gram => commands::gram(&options),
        }
    });
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("kstab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
