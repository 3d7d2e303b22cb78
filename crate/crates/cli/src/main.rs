//! `rkhs-scale`: classification, kernel translates, sampling and the MLE
//! rate experiment from the command line.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Exit code for usage and parse errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit code when a standing assumption of the theory is not met.
pub const EXIT_ASSUMPTION: u8 = 3;
/// Exit code for numeric failures.
pub const EXIT_NUMERIC: u8 = 4;
/// Exit code for I/O failures.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "rkhs-scale", version, about = "Scaled RKHS toolkit")]
#[command(
    after_help = "Exit codes: 0 ok, 1 I/O failure, 2 usage or parse error, 3 assumption unmet, 4 numeric failure."
)]
pub struct Cli {
    /// TOML file whose keys are flag names of the chosen subcommand; flags
    /// given on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probability that sample paths lie in a scaled RKHS.
    Classify(ClassifyArgs),
    /// Kernel translates t ↦ K(t, t') as CSV, for a figure preset or a custom spec.
    Translates(TranslatesArgs),
    /// Karhunen–Loève sample paths as CSV.
    Sample(SampleArgs),
    /// Maximum-likelihood scale rate experiment for f(t) = t^p.
    Mle(MleArgs),
    /// Diagnostics of the Dini refinement, the dominating series and the
    /// strictly smaller envelope.
    Dini(DiniArgs),
    /// Sample-support-set classification of basis coefficients.
    Support(SupportArgs),
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct ClassifyArgs {
    /// Basis, e.g. `gauss:ell=0.8`, `ibb:s=4`, `power:exp`.
    #[arg(long)]
    pub basis: String,
    /// Scaling, e.g. `hyp:2`, `geo:1.1`, `logpow:1`, `itlog:1,3,2`, `id`.
    #[arg(long)]
    pub scaling: String,
    /// Emit one JSON line with keys basis, scaling, validity, reciprocal_sum,
    /// probability, partial_sum, tail_bound, evidence_n, reason.
    #[arg(long)]
    pub machine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Iterated Brownian bridge s = 4 at t' = 0.3 with id, hyp:1, logpow:1,
    /// logpow:2, 5000 terms, normalized second derivatives.
    Fig1,
    /// Gaussian ℓ = 0.8 on [-1, 3] at t' = 1 with id, hyp:1, hyp:1.1, hyp:2, geo:1.1.
    Fig2,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct TranslatesArgs {
    #[arg(long, value_enum, conflicts_with_all = ["basis", "scalings"])]
    pub preset: Option<Preset>,
    #[arg(long, requires = "scalings")]
    pub basis: Option<String>,
    /// Semicolon-separated scalings, e.g. `id;hyp:1;logpow:2`.
    #[arg(long, requires = "basis")]
    pub scalings: Option<String>,
    #[arg(long = "t-prime")]
    pub t_prime: Option<f64>,
    /// `lo:hi:count`; defaults to the basis domain.
    #[arg(long)]
    pub grid: Option<String>,
    /// Add second-derivative columns (sine basis only).
    #[arg(long)]
    pub d2: bool,
    /// Scale each second-derivative column to have minimum −1.
    #[arg(long)]
    pub normalize: bool,
    /// Keep exactly this many series terms.
    #[arg(long = "fixed-n")]
    pub fixed_n: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub basis: String,
    /// Number of Karhunen–Loève terms.
    #[arg(long, default_value_t = rkhs_scale::gp::DEFAULT_TRUNCATION)]
    pub truncation: u64,
    /// Number of paths.
    #[arg(long, default_value_t = 1)]
    pub paths: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// `lo:hi:count`; defaults to 101 points on the basis domain.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct MleArgs {
    /// Degree of the monomial data f(t) = t^p.
    #[arg(long)]
    pub p: u32,
    /// Gaussian length-scale.
    #[arg(long, default_value_t = 0.8)]
    pub ell: f64,
    /// Comma-separated grid sizes; points are i/N for i = 1..N.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    #[serde(rename = "N")]
    pub sizes: Vec<usize>,
    #[arg(long = "initial-bits", default_value_t = 512)]
    #[serde(rename = "initial-bits")]
    pub initial_bits: u32,
    #[arg(long = "max-bits", default_value_t = 8192)]
    #[serde(rename = "max-bits")]
    pub max_bits: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DiniMode {
    /// `a_n / U_n^c` for the reciprocals of the first scaling.
    Refine,
    /// A summable series dominating the reciprocals of every scaling.
    Dominate,
    /// A scaling strictly smaller than every given convergent scaling.
    Envelope,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct DiniArgs {
    #[arg(long, value_enum, default_value_t = DiniMode::Refine)]
    pub mode: DiniMode,
    /// Semicolon-separated scalings with convergent reciprocal sums, e.g. `hyp:2;geo:1.5`.
    #[arg(long)]
    pub scalings: String,
    /// Refinement exponent in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Report rows at n = 2^k for k = 0..=this.
    #[arg(long = "max-log2", default_value_t = 20)]
    #[serde(rename = "max-log2")]
    pub max_log2: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingArg {
    Natural,
    /// ψ_{2k+1} = φ_{2^k}, remaining indices interleaved at even positions.
    Interleaved,
}

#[derive(Debug, Clone, clap::Args, Serialize)]
pub struct SupportArgs {
    /// Coefficients, e.g. `const:1`, `hyp:-1`, `powers:2`, `arith:1,2`, `monomial:1,0.8`.
    #[arg(long)]
    pub coeffs: String,
    /// First index of the coefficient sequence (monomials always start at 0).
    #[arg(long, default_value_t = 1)]
    pub origin: u64,
    #[arg(long, value_enum, default_value_t = OrderingArg::Natural)]
    pub ordering: OrderingArg,
    /// Also report the norm in the space scaled by this scaling.
    #[arg(long)]
    pub scaling: Option<String>,
    /// Truncation of the reported norm.
    #[arg(long = "norm-terms", default_value_t = 100_000)]
    #[serde(rename = "norm-terms")]
    pub norm_terms: u64,
    #[arg(long)]
    pub machine: bool,
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::parse_from(argv);
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
