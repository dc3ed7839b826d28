//! Command-line front end: argument parsing, run manifests and report emission.

pub mod commands;
pub mod emit;
pub mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use emit::emit_plotdata;
pub use manifest::RunManifest;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERDICT: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(lielab_core::Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(s) => write!(f, "I/O error: {s}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<lielab_core::Error> for CliError {
    fn from(e: lielab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "lielab", version, about = "Root systems, alcove cells, characters, kernels and exponential sums")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "LIELAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Root system data.
    #[command(subcommand)]
    Rootsys(RootsysCmd),
    /// Weight lattice splittings.
    #[command(subcommand)]
    Lattice(LatticeCmd),
    /// Alcove cell decomposition.
    #[command(subcommand)]
    Alcove(AlcoveCmd),
    /// Character evaluation.
    #[command(subcommand)]
    Char(CharCmd),
    /// Exact combinatorial verifiers.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Dyadic L^p scans with slope fits.
    Scan(ScanArgs),
    /// Farey arcs and exponential sums.
    #[command(subcommand)]
    Arith(ArithCmd),
    /// The acceptance battery.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Subcommand, Debug, Serialize)]
pub enum RootsysCmd {
    /// JSON dump of roots, Cartan matrix and marks.
    Dump {
        #[arg(long = "type")]
        type_label: String,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum LatticeCmd {
    /// Λ = ^JΛ ⊕ complement on both sides, with the coset decomposition.
    Split {
        #[arg(long = "type")]
        type_label: String,
        /// Comma-separated node indices in 0..=r.
        #[arg(long = "J", allow_hyphen_values = true)]
        j: String,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum AlcoveCmd {
    /// Monte-Carlo volumes of every cell P_{I,J} at scale N.
    Cells {
        #[arg(long = "type")]
        type_label: String,
        #[arg(long = "N")]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum CharCmd {
    /// χ_μ at one alcove point.
    Eval {
        #[arg(long = "type")]
        type_label: String,
        /// Dynkin labels of a strictly dominant μ.
        #[arg(long, allow_hyphen_values = true)]
        mu: String,
        /// Barycentric t_0..t_r, or θ_1..θ_r.
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        /// Also evaluate the Freudenthal oracle.
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum VerifyCmd {
    /// Search for the exponent tuple of the root product.
    KeyLemma {
        #[arg(long = "type")]
        type_label: String,
        /// Force a certificate mode; by default expansion up to rank 4.
        #[arg(long, value_enum)]
        mode: Option<TupleMode>,
    },
    /// |J|/|Σ_J^+| > r/|Σ^+| over all irreducible types up to a rank.
    Subsystem {
        #[arg(long, default_value_t = 8)]
        max_rank: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
pub enum TupleMode {
    Expansion,
    Counting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ScanKind {
    InvDelta,
    CharNorm,
    Kernel,
    ClassStrichartz,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
pub enum Family {
    /// μ = Nρ.
    Rho,
    /// Strictly dominant point nearest Nρ/|ρ|.
    Regular,
}

#[derive(Args, Debug, Serialize)]
pub struct ScanArgs {
    #[arg(value_enum)]
    pub quantity: ScanKind,
    #[arg(long = "type")]
    pub type_label: String,
    #[arg(long)]
    pub p: f64,
    #[arg(long = "N-min")]
    pub n_min: u32,
    #[arg(long = "N-max")]
    pub n_max: u32,
    /// Monte-Carlo samples per cell and N (rank ≥ 2).
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Cell vertex set (inv-delta only).
    #[arg(long = "I", allow_hyphen_values = true)]
    pub i: Option<String>,
    /// Cell wall set (inv-delta only).
    #[arg(long = "J", allow_hyphen_values = true)]
    pub j: Option<String>,
    /// Slope tolerance; defaults to 0.1 in rank one and 0.15 otherwise.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Weight family for char-norm.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Major arc a/q + γ for kernel, with γ = coeff·N^(-exp).
    #[arg(long, default_value_t = 0)]
    pub a: i64,
    #[arg(long, default_value_t = 1)]
    pub q: i64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_coeff: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma_exp: f64,
    /// Also write log-log plot data here.
    #[arg(long)]
    #[serde(skip)]
    pub plot: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum ArithCmd {
    /// Farey dissection of order n, checked exactly.
    Farey {
        #[arg(long)]
        order: i64,
    },
    /// Normalized quadratic Gauss sum S(a, c; q).
    Gauss {
        /// Symmetric integer matrix, rows separated by ';'.
        #[arg(long = "A", allow_hyphen_values = true)]
        a_matrix: String,
        #[arg(long)]
        q: i64,
        #[arg(long)]
        a: i64,
        /// Linear term; zero by default.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
    },
    /// Kloosterman and Salié sums mod a prime against the Weil bound.
    Kloosterman {
        #[arg(long)]
        q: i64,
        /// Every (m, n) mod q.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
pub enum SuiteCmd {
    /// Runs criteria 1 to 10 and prints one verdict line each.
    Acceptance {
        /// Comma-separated subset of criteria.
        #[arg(long)]
        only: Option<String>,
    },
}

/// Parses argv (including the program name) and runs; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("usage error: --threads must be positive");
            return EXIT_USAGE;
        }
        // a pool may already exist when run is called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let line: Vec<String> = argv.iter().map(|s| s.to_string_lossy().into_owned()).collect();
    match commands::dispatch(&cli, &line) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_VERDICT,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
