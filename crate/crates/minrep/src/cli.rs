use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "minrep", version)]
#[command(about = "Verification suites for the minimal representation of conformal groups of non-Euclidean Jordan algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the classification table
    Table {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Only the row with this tag, e.g. O_2n2n
        #[arg(long)]
        family: Option<String>,
    },
    /// Run one verification suite, or all of them
    Verify(VerifyArgs),
    /// Tabulate K_τ and φ_τ with the residual of Dφ_τ = 0
    Bessel(BesselArgs),
    /// Stabilizers of rank-k points
    Tensor {
        #[command(subcommand)]
        command: TensorCommand,
    },
    /// Inspect a matrix model
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Sample the minimal orbit
    Orbit {
        #[command(subcommand)]
        command: OrbitCommand,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// o2n2n, gl2n, opq, or a table tag
    #[arg(long, default_value = "o2n2n")]
    pub model: String,
    /// Jordan rank
    #[arg(long, default_value_t = 2)]
    pub n: u32,
    /// First signature entry for --model opq
    #[arg(long)]
    pub p: Option<u32>,
    /// Second signature entry for --model opq
    #[arg(long)]
    pub q: Option<u32>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the full JSON report here
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the spherical grid estimates here as CSV
    #[arg(long)]
    pub grid_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct BesselArgs {
    /// Order, e.g. 0, 1/2, -1/2
    #[arg(long, allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long)]
    pub zmin: f64,
    #[arg(long)]
    pub zmax: f64,
    /// Number of rows, evenly spaced from zmin to zmax
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Subcommand, Debug)]
pub enum TensorCommand {
    /// Compare the stabilizer decomposition with the table's dual pair
    Audit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ModelCommand {
    /// Basis, grading, triples and ν of a model
    Dump {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Subcommand, Debug)]
pub enum OrbitCommand {
    /// Points of O₁ as CSV: exact Ad(l)y₁ with --exact, otherwise unit
    /// points Haar(M)·y₁
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    /// Jacobi, θ, form invariance, grading, sl2 triples
    Structural,
    /// tr ad on s₁ against 2dν, and the block shape of s₁
    Modular,
    /// The constants k, k′, k″ and the crown assembly
    Constants,
    /// Bracket compatibility of the action formulas
    Action,
    /// Exact ingredients plus the Monte Carlo cancellation on a grid
    Spherical,
    /// Orbit sampling, measure scaling and equivariance, Φ
    Orbit,
    /// K_τ, φ_τ and Dφ_τ = 0
    Bessel,
    /// Finiteness of ‖g_τ‖ across the table
    L2,
    /// Stabilizers of rank-k points and dual pairs
    Tensor,
    /// The classification table
    Catalog,
    All,
}

impl Suite {
    /// What `all` runs; `spherical` already contains `constants` and
    /// `action`.
    pub const EACH: [Suite; 8] = [
        Suite::Catalog,
        Suite::Structural,
        Suite::Modular,
        Suite::Bessel,
        Suite::L2,
        Suite::Spherical,
        Suite::Orbit,
        Suite::Tensor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Structural => "structural",
            Suite::Modular => "modular",
            Suite::Constants => "constants",
            Suite::Action => "action",
            Suite::Spherical => "spherical",
            Suite::Orbit => "orbit",
            Suite::Bessel => "bessel",
            Suite::L2 => "l2",
            Suite::Tensor => "tensor",
            Suite::Catalog => "catalog",
            Suite::All => "all",
        }
    }
}
