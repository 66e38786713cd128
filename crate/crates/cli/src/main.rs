//! `gvfa`: verify matrix products, inject faults and run detection
//! experiments from the command line.
//!
//! Exit status: 0 accepted, 1 rejected, 2 error, 3 neutral injection.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gvfa_core::Method;

#[derive(Parser, Debug)]
#[command(name = "gvfa", version, about = "Verify floating-point matrix products without recomputing them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a claimed product C = A·B (or a chain product).
    Verify(VerifyArgs),
    /// Write a faulted copy of a matrix.
    Inject(InjectArgs),
    /// Monte Carlo detection experiment; prints an ExperimentReport.
    Experiment(ExperimentArgs),
    /// False-positive bound for an error matrix Δ or a triple (A, B, C).
    Bound(BoundArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// The 2×2 column-swap counterexample A=[[2,3],[3,4]], B=[[1,-6],[1,6]].
    Paper2x2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepUnitArg {
    /// Magnitudes are multiples of each instance's tolerance scale.
    Tau,
    Absolute,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Random seed, decimal or 0x-prefixed hex.
    #[arg(long, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
    /// `auto` for the componentwise round-off tolerance, or an absolute value.
    #[arg(long, default_value = "auto")]
    pub tolerance: String,
    /// Accumulate with fused multiply-add.
    #[arg(long)]
    pub fma: bool,
    #[arg(long, value_enum)]
    pub output: Option<Output>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_method, default_value = "gvfa")]
    pub method: Method,
    #[arg(long, conflicts_with_all = ["chain", "fixture"], requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["chain", "fixture"], requires = "a")]
    pub b: Option<PathBuf>,
    /// Claimed product. Defaults to the fixture's correct product.
    #[arg(long)]
    pub c: Option<PathBuf>,
    /// Factor files F1 F2 ... of a chain product.
    #[arg(long, num_args = 2.., conflicts_with = "fixture")]
    pub chain: Option<Vec<PathBuf>>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct InjectArgs {
    /// Matrix to corrupt.
    #[arg(long)]
    pub c: PathBuf,
    /// Fault in the grammar `element:r,c,delta`, `rowswap:i,j`, `colswap:i,j`,
    /// `bitflip:r,c,bit`, `sparse:r,c,delta;...` or
    /// `adversarial-paired-columns[:i,j,magnitude]`.
    #[arg(long)]
    pub fault: String,
    /// Destination file; the matrix goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub output: Option<Output>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    #[arg(long, value_parser = parse_method, default_value = "gvfa")]
    pub method: Method,
    /// Fault grammar as for `inject`; omitted means no fault.
    #[arg(long, conflicts_with = "sweep")]
    pub fault: Option<String>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    /// Columns of C.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    /// Rows of C; defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Inner dimension; defaults to `n`.
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of factors for `--method chain`.
    #[arg(long, default_value_t = 2)]
    pub chain_len: usize,
    /// Spread column magnitudes of the factors over this many decades.
    #[arg(long)]
    pub graded: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Comma-separated single-entry fault magnitudes; runs one experiment each.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub sweep: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "tau")]
    pub sweep_unit: SweepUnitArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Error matrix Δ.
    #[arg(long, conflicts_with_all = ["a", "b", "c"], required_unless_present = "c")]
    pub delta: Option<PathBuf>,
    #[arg(long, requires_all = ["b", "c"])]
    pub a: Option<PathBuf>,
    #[arg(long, requires_all = ["a", "c"])]
    pub b: Option<PathBuf>,
    /// Claimed product; Δ = A·B − C.
    #[arg(long, requires_all = ["a", "b"])]
    pub c: Option<PathBuf>,
    /// Scalar threshold. Defaults to the tolerance scale of (A, B, C).
    #[arg(long, required_unless_present = "c")]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub common: Common,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed `{s}`: {e}"))
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: gvfa_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gvfa: {e}");
            ExitCode::from(commands::EXIT_ERROR)
        }
    }
}
