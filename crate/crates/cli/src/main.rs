mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use polyshift::bijection::BijectionError;
use polyshift::complex::ComplexError;
use polyshift::geometry::GeometryError;
use polyshift::presentation::PresentationError;
use polyshift::shift::{Shape, ShiftError};

use output::Format;

/// Triangle presentations over PG(2,q): planes, basic bijections,
/// polyhedra, and the associated two-dimensional shift.
#[derive(Parser)]
#[command(name = "polyshift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Plane order (a prime power up to 27). Defaults to 2.
    #[arg(long, global = true)]
    pub q: Option<u32>,
    /// Read the plane from an incidence list or plane JSON instead.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,
    /// Use this bijection JSON instead of searching.
    #[arg(long, global = true)]
    pub seed_file: Option<PathBuf>,
    /// Write artifacts into this directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Artifact formats to write (default: all).
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Vec<Format>,
    /// Time budget for bijection and word searches.
    #[arg(long, global = true)]
    pub budget_ms: Option<u64>,
    /// Largest |p_i| tested for non-periodicity.
    #[arg(long, global = true, default_value_t = 3)]
    pub p_max: usize,
    /// Window for the non-periodicity search, as m1,m2.
    #[arg(long, global = true, default_value = "5,5", value_parser = parse_shape)]
    pub window: Shape,
    /// Maximum number of words to emit.
    #[arg(long, global = true, default_value_t = 20)]
    pub limit: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Build or load a plane and check its axioms.
    Plane,
    /// Search for or verify a basic bijection.
    Bijection {
        /// Count every solution instead of stopping at the first.
        #[arg(long, conflicts_with = "exhaustive")]
        count_all: bool,
        /// Search the whole tree without symmetry pinning.
        #[arg(long)]
        exhaustive: bool,
        /// Verify this bijection JSON against the plane.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Build the triple set and the tagged presentation.
    Presentation {
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Build the polyhedron and certify its links.
    Polyhedron {
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Build the transition matrices and check the hypotheses.
    Shift {
        /// Check these matrices (MatrixMarket or CSV) instead of the built ones.
        #[arg(long, requires = "m2")]
        m1: Option<PathBuf>,
        #[arg(long, requires = "m1")]
        m2: Option<PathBuf>,
    },
    /// Count and enumerate words on a box.
    Words {
        /// Box [0,m] as m1,m2.
        #[arg(long, default_value = "1,0", value_parser = parse_shape)]
        shape: Shape,
        /// Validate the words in this JSON file.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
    /// Run every stage and write a certificate.
    Pipeline,
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts[..] {
        [a, b] => Ok([a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?]),
        _ => Err("expected two numbers separated by a comma".into()),
    }
}

/// Reports whose mandatory gates failed.
#[derive(Debug)]
pub struct VerificationFailed;

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<VerificationFailed>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<BijectionError>() {
            return match e {
                BijectionError::Timeout { .. } => 3,
                BijectionError::NotFound { .. } | BijectionError::Invalid(_) | BijectionError::DomainError { .. } => 1,
                _ => 2,
            };
        }
        if let Some(e) = cause.downcast_ref::<ShiftError>() {
            return match e {
                ShiftError::BudgetExceeded(_) => 3,
                ShiftError::InvalidPresentation(_) => 1,
                _ => 2,
            };
        }
        if let Some(GeometryError::Axiom(_)) = cause.downcast_ref::<GeometryError>() {
            return 1;
        }
        if let Some(PresentationError::InvalidK(_)) = cause.downcast_ref::<PresentationError>() {
            return 1;
        }
        if let Some(ComplexError::InvalidPresentation(_)) = cause.downcast_ref::<ComplexError>() {
            return 1;
        }
    }
    2
}

fn run(cli: Cli) -> Result<()> {
    let common = cli.common;
    let outcome = match cli.command {
        Command::Plane => commands::plane(&common)?,
        Command::Bijection { count_all, exhaustive, verify } => {
            commands::bijection(&common, count_all, exhaustive, verify.as_deref())?
        }
        Command::Presentation { verify } => commands::presentation(&common, verify.as_deref())?,
        Command::Polyhedron { verify } => commands::polyhedron(&common, verify.as_deref())?,
        Command::Shift { m1, m2 } => commands::shift(&common, m1.as_deref().zip(m2.as_deref()))?,
        Command::Words { shape, verify } => commands::words(&common, shape, verify.as_deref())?,
        Command::Pipeline => commands::pipeline(&common)?,
    };
    let formats = if common.format.is_empty() {
        vec![Format::Json, Format::Dot, Format::Text, Format::Mm, Format::Csv]
    } else {
        common.format.clone()
    };
    outcome.emit(common.out.as_deref(), &formats)?;
    if !outcome.passed() {
        bail!(VerificationFailed);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
