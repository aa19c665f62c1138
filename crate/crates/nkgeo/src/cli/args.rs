use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "nkgeo", version, about = "Null-Kähler and Painlevé metric checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run structure and PDE checks on a null-Kähler potential.
    Verify(VerifyArgs),
    /// Integrate a Painlevé family and check its metric along the solution.
    Painleve(PainleveArgs),
    /// Lax pair compatibility, flatness and gauge class for one case.
    Isomonodromy(IsoArgs),
    /// List the built-in potentials, or print one.
    Examples(ExamplesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every command. Only the seed enters the report.
#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Seed for the ChaCha8 sampler.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report destination (default stdout).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    #[serde(skip)]
    pub format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    /// Built-in name, path to a potential file, or an expression in x1.., y1...
    #[arg(long)]
    pub potential: String,
    /// Half the number of x-coordinates (defaults to the file's `n:` or 1).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated: all, structure, einstein, heavenly, asd, sd, footnote, hk, lax, joyce, ricci.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub checks: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Coordinates are sampled from [-range, range].
    #[arg(long, default_value_t = 2.0)]
    pub range: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum FamilyArg {
    #[value(name = "I", alias = "PI", alias = "pi", alias = "1")]
    I,
    #[value(name = "II", alias = "PII", alias = "pii", alias = "2")]
    II,
    #[value(name = "solvable")]
    Solvable,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PainleveArgs {
    #[arg(long, value_enum)]
    pub kind: FamilyArg,
    /// PII parameter.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Solvable family constants.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Number of t-intervals; samples are taken at `samples + 1` times.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// Initial values of the unknowns at t0 (PI: y,z; PII: u,y,z).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Magnitude at which the integration is declared to have hit a pole.
    #[arg(long, default_value_t = 1e6)]
    pub blowup: f64,
    /// Also write the per-sample table as CSV here.
    #[arg(long)]
    #[serde(skip)]
    pub trajectory: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum CaseArg {
    #[value(name = "pII", alias = "PII", alias = "pii")]
    PII,
    #[value(name = "PI", alias = "pI", alias = "pi")]
    PI,
    #[value(name = "solvable")]
    Solvable,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct IsoArgs {
    #[arg(long, value_enum)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
    /// Rectangle `lambda0,lambda1,t0,t1` for the flatness test.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 0.0, 0.5], allow_hyphen_values = true)]
    pub grid: Vec<f64>,
    /// Number of t-intervals in the trajectory comparison.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Option<Vec<f64>>,
    /// Sampled points for the symbolic-or-numeric zero tests.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e6)]
    pub blowup: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExamplesArgs {
    /// Print this potential file instead of the list.
    pub name: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
