use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "carnot", version, about = "Certified computations on Carnot groups")]
pub struct Cli {
    /// Builtin family (`heisenberg(1)`, `engel`, `free_nilpotent(2,3)`) or
    /// path to an algebra JSON document.
    #[arg(long, global = true)]
    pub algebra: Option<String>,

    /// Arithmetic used for path endpoints.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Rational)]
    pub mode: Mode,

    /// Seed of the sampling PRNG.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Write the command's table (waypoints, samples, elements, …) as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,

    /// Add wall-clock timing to the report (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Algebra documents.
    Algebra {
        #[command(subcommand)]
        action: AlgebraAction,
    },
    /// Popp scalar products.
    Popp {
        #[command(subcommand)]
        action: PoppAction,
    },
    /// Box radii and the systolic constant.
    Constants {
        /// Layer dimensions, e.g. `2,1,1`; taken from `--algebra` if absent.
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
    },
    /// Adjusted sets for a layer vector, or the full tuple for a point.
    Adjust {
        /// Layer of the target; without it the target is a full point.
        #[arg(long)]
        layer: Option<usize>,
        /// Comma-separated rational coordinates.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
    },
    /// Certified horizontal path from the identity to a point.
    Path {
        /// Comma-separated rational coordinates.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
    },
    /// Sample the ε-box and certify a path of length ≤ 1 to every sample.
    BoxVerify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        bins: u64,
    },
    /// Systolic inequality on a lattice.
    Systole {
        /// Lattice JSON document.
        #[arg(long)]
        lattice: PathBuf,
        /// Word radius of the enumeration.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        radius: u64,
    },
    /// BCH coefficient tables.
    Bch {
        #[command(subcommand)]
        action: BchAction,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum AlgebraAction {
    /// Validate an algebra and summarize it.
    Check {
        /// Builtin or path; overrides `--algebra`.
        spec: Option<String>,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum PoppAction {
    /// Bracket matrices, Gram matrices and orthonormal frames per layer.
    Gram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKindArg {
    Beta,
    Gamma,
}

#[derive(Debug, Clone, Subcommand)]
pub enum BchAction {
    /// Canonical coefficient table.
    Tables {
        #[arg(long, value_enum)]
        kind: TableKindArg,
        /// Number of factors (beta) or commutator length (gamma).
        #[arg(long)]
        arity: usize,
        /// Step; taken from `--algebra` if absent.
        #[arg(long)]
        step: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Algebra { .. } => "algebra check",
            Command::Popp { .. } => "popp gram",
            Command::Constants { .. } => "constants",
            Command::Adjust { .. } => "adjust",
            Command::Path { .. } => "path",
            Command::BoxVerify { .. } => "box-verify",
            Command::Systole { .. } => "systole",
            Command::Bch { .. } => "bch tables",
        }
    }
}
