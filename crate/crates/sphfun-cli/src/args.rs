use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "sphfun",
    version,
    about = "Square-integrable spheroidal functions on the whole real axis",
    args_override_self = true
)]
pub struct Cli {
    /// Report errors as JSON on standard error.
    #[arg(long, global = true)]
    pub json_errors: bool,

    /// JSON file whose keys mirror the flag names of the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one eigenpair.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Eigen(EigenArgs),
    /// Tabulate a stored solution on a grid.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Eval(EvalArgs),
    /// Compare series eigenvalues with the shooting oracle.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Verify(VerifyArgs),
    /// Levels of a finite-depth spheroidal ring.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Ring(RingArgs),
    /// Characteristic roots of the recurrences.
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Roots(RootsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Jaffe,
    Power,
}

/// `auto` or an explicit order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Auto,
    Fixed(usize),
}

fn parse_order(s: &str) -> Result<Order, String> {
    if s == "auto" {
        return Ok(Order::Auto);
    }
    s.parse::<usize>()
        .map(Order::Fixed)
        .map_err(|_| format!("expected `auto` or a nonnegative integer, got `{s}`"))
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub m: i64,
    #[arg(long)]
    pub k: i64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Truncation order.
    #[arg(long = "N", value_parser = parse_order, default_value = "auto")]
    pub n: Order,
    #[arg(long, value_enum, default_value_t = Method::Jaffe)]
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Norm {
    Max,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Output of `eigen`, or a bare solution object.
    #[arg(long)]
    pub solution: PathBuf,
    /// `start:stop:count`
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, value_enum)]
    pub normalize: Option<Norm>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Matrix {
    Default,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, conflicts_with_all = ["fixture", "m"])]
    pub matrix: Option<Matrix>,
    /// Cases with stored eigenvalues: one object, an array, or `{"cases": [...]}`.
    #[arg(long, conflicts_with = "m")]
    pub fixture: Option<PathBuf>,
    #[arg(long, requires_all = ["k", "p", "a"])]
    pub m: Option<i64>,
    #[arg(long)]
    pub k: Option<i64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RingArgs {
    #[arg(long, default_value_t = 0)]
    pub m: i64,
    #[arg(long = "U0")]
    pub u0: f64,
    #[arg(long)]
    pub xi0: f64,
    #[arg(long = "R")]
    pub r: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "E-min")]
    pub e_min: f64,
    #[arg(long = "E-max")]
    pub e_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Include the sampled interior and exterior functions of each level.
    #[arg(long)]
    pub with_grids: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Quartic,
    Cubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Derived,
    Printed,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[arg(long)]
    pub m: i64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub n: i64,
    #[arg(long, value_enum, default_value_t = Family::Quartic)]
    pub family: Family,
    /// Four-term table used by the cubic family.
    #[arg(long, value_enum, default_value_t = ParityArg::Even)]
    pub parity: ParityArg,
    /// Coefficient table of the quartic.
    #[arg(long, value_enum, default_value_t = Table::Derived)]
    pub table: Table,
}
