mod commands;
mod display;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Failure;

/// Exact construction, factorization and rendering of self-similar copulas.
#[derive(Debug, Parser)]
#[command(name = "fractal-copula", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Invariant pairs, block masses, contraction factor and factorizability.
    Decompose {
        /// Transformation matrix file.
        matrix: PathBuf,
    },
    /// Iterates the patching operator and tabulates the step distances.
    Fixpoint {
        matrix: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Starting copula: `pi`, `mgrid:n` (diagonal) or `wgrid:n` (antidiagonal).
        #[arg(long, default_value = "pi")]
        seed: String,
        /// Copula output file; without it the copula goes to stdout and the
        /// table to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also report the two derivative components and the a-priori bound.
        #[arg(long)]
        report_norms: bool,
    },
    /// Writes the left factor, right factor and product iterates and checks
    /// the product identity.
    Factorize {
        matrix: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Runs every exact invariant check at the given depth.
    Verify {
        matrix: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Renders a copula file as a PGM image or a CSV cell list.
    Render {
        copula: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        /// Image size `WxH`; required for PGM.
        #[arg(long)]
        size: Option<String>,
        /// Black/white mask: black where density exceeds `t` times the maximum.
        #[arg(long)]
        threshold: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pgm,
    Csv,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Decompose { matrix } => commands::decompose(&matrix),
        Command::Fixpoint {
            matrix,
            depth,
            seed,
            out,
            report_norms,
        } => commands::fixpoint(&matrix, depth, &seed, out.as_deref(), report_norms),
        Command::Factorize {
            matrix,
            depth,
            out_prefix,
        } => commands::factorize(&matrix, depth, &out_prefix),
        Command::Verify { matrix, depth } => commands::verify(&matrix, depth),
        Command::Render {
            copula,
            format,
            size,
            threshold,
            out,
        } => commands::render(&copula, format == Format::Pgm, size.as_deref(), threshold.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
