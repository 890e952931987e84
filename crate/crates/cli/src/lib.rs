//! Command-line front end: loads JSON models and runs the checkers.
//!
//! Exit codes: `0` every check passed, `1` a check failed, `2` usage, I/O or
//! validation error.

pub mod commands;
pub mod model;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpkit::theorems::Kind;
use cpkit::tolerance::InvalidTolerance;

pub use model::{parse_model, Model, ModelError};
pub use output::{Report, Residual};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tolerance(#[from] InvalidTolerance),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "cpkit",
    version,
    allow_negative_numbers = true,
    about = "Check Frobenius structures, CPM and CP* morphisms from JSON models"
)]
pub struct Cli {
    /// Structural tolerance (morphism equality, axioms, Hermiticity).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub eps: f64,
    /// Tolerance for reconstructions after a decomposition.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub roundtrip_eps: f64,
    /// Eigensolver threshold; smaller eigenvalues are clamped to zero.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub eig_eps: f64,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Axiom checks.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Completely positive maps given by Kraus slices or superoperators.
    #[command(subcommand)]
    Cpm(CpmCommand),
    /// Morphisms between Frobenius structures.
    #[command(subcommand)]
    Cpstar(CpStarCommand),
    /// Environment structure (discarding) equations.
    #[command(subcommand)]
    Env(SampledCommand),
    /// Decoherence structure equations.
    #[command(subcommand)]
    Dec(SampledCommand),
    /// Functor laws and round trips of the mediating functors.
    #[command(subcommand)]
    Theorems(TheoremCommand),
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Special dagger Frobenius axioms, one residual per axiom.
    Frobenius { file: String, name: String },
}

#[derive(Debug, Subcommand)]
pub enum CpmCommand {
    /// Superoperator of a Kraus family.
    Realize {
        file: String,
        name: String,
    },
    /// `g ∘ f`.
    Compose {
        file: String,
        g: String,
        f: String,
    },
    /// `f ⊗ g`.
    Tensor {
        file: String,
        f: String,
        g: String,
    },
    Dagger {
        file: String,
        f: String,
    },
    /// Choi matrix and its spectrum; `name` is a cpm or a superoperator matrix.
    Choi {
        file: String,
        name: String,
    },
    /// Complete positivity; fails with the most negative Choi eigenvalue.
    IsCp {
        file: String,
        name: String,
    },
    /// Kraus slices for a superoperator matrix or cpm.
    Purify {
        file: String,
        name: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum CpStarCommand {
    /// Map of a witnessed cpstar entity.
    Realize {
        file: String,
        name: String,
    },
    IsMember {
        file: String,
        name: String,
    },
    Purify {
        file: String,
        name: String,
    },
    /// `g ∘ f`.
    Compose {
        file: String,
        g: String,
        f: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum SampledCommand {
    /// Runs the checker on seeded samples plus the model's own morphisms.
    Check(SampledArgs),
}

#[derive(Debug, Args)]
pub struct SampledArgs {
    pub file: String,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Which discard or frob family to check.
    #[arg(long, value_enum, default_value_t = Family::Canonical)]
    pub family: Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Canonical,
    SignFlipped,
}

#[derive(Debug, Subcommand)]
pub enum TheoremCommand {
    Run {
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    s.parse()
}

/// Exit code and the text for each stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match commands::execute(&cli) {
        Ok(report) => Outcome {
            code: report.exit_code(),
            stdout: if cli.json { report.to_json() } else { report.to_text() },
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
