use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthant_walks::enumerate::{Mode, DEFAULT_GUARD};
use orthant_walks::rational::{parse_decimal, Rational};
use orthant_walks::validate::Target;

#[derive(Debug, Parser)]
#[command(name = "walks", version, about = "Weighted lattice walks in orthants")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    /// Largest number of table cells a run may hold (e.g. 50000000 or 5e7).
    #[arg(long, global = true, value_parser = parse_guard, default_value_t = DEFAULT_GUARD)]
    pub guard: u128,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count walks by length.
    #[command(args_override_self = true)]
    Count(CountArgs),
    /// Draw a walk with probability proportional to its weight.
    #[command(args_override_self = true)]
    Sample(SampleArgs),
    /// Decide and solve central weightings.
    #[command(args_override_self = true)]
    Central(CentralArgs),
    /// Universality class of a two-dimensional model.
    #[command(args_override_self = true)]
    Classify(ModelArgs),
    /// Classify a built-in family over a grid of parameters.
    #[command(args_override_self = true)]
    Diagram(DiagramArgs),
    /// Closed forms of the weighted Gouyou-Beauchamps family.
    #[command(subcommand)]
    Gb(GbCommand),
    /// Null space of the walk-count system and its minimal refutation length.
    #[command(args_override_self = true)]
    Conjecture2(ConjectureArgs),
    /// Compare exact counts with the closed-form estimates.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
}

pub const COMMANDS: [&str; 8] = ["count", "sample", "central", "classify", "diagram", "gb", "conjecture2", "validate"];
pub const GB_COMMANDS: [&str; 4] = ["classify", "estimate", "harmonic", "critical"];

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in model (gb, tandem, gessel, simple) or a path to step-set JSON.
    #[arg(long, default_value = "gb", conflicts_with = "steps_file")]
    pub model: String,
    /// Step-set JSON `{"dimension":2,"steps":[{"v":[1,0],"w":"1/2"},...]}` instead of a built-in.
    #[arg(long)]
    pub steps_file: Option<PathBuf>,
    /// Weight parameter along the first axis.
    #[arg(long, value_parser = parse_rat, default_value = "1")]
    pub a: Rational,
    /// Weight parameter along the second axis.
    #[arg(long, value_parser = parse_rat, default_value = "1")]
    pub b: Rational,
    /// Explicit weights in step order, replacing the model's.
    #[arg(long, value_parser = parse_rat, value_delimiter = ',')]
    pub weights: Option<Vec<Rational>>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Start point, e.g. `0,0`; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Option<Vec<i64>>,
    /// Largest length.
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_mode, default_value = "exact")]
    pub mode: Mode,
    /// Also list the endpoints of the final length.
    #[arg(long)]
    pub endpoints: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Option<Vec<i64>>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_mode, default_value = "exact")]
    pub mode: Mode,
}

#[derive(Debug, Args)]
pub struct CentralArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Step indices of the basis `T` (defaults to the first independent steps).
    #[arg(long, value_delimiter = ',')]
    pub basis: Option<Vec<usize>>,
    /// Second weighting of the same steps to test for equivalence.
    #[arg(long, value_parser = parse_rat, value_delimiter = ',')]
    pub compare: Option<Vec<Rational>>,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Built-in family.
    #[arg(long, default_value = "gb")]
    pub model: String,
    /// `start:stop:step`, inclusive and exact.
    #[arg(long)]
    pub a_range: String,
    #[arg(long)]
    pub b_range: String,
}

#[derive(Debug, Subcommand)]
pub enum GbCommand {
    /// Class, growth and exponent.
    #[command(args_override_self = true)]
    Classify(GbArgs),
    /// Leading asymptotic term at length n.
    #[command(args_override_self = true)]
    Estimate(GbEstimateArgs),
    /// Verify the harmonicity recurrence on a grid.
    #[command(args_override_self = true)]
    Harmonic(GbHarmonicArgs),
    /// Critical points and the contributing ones.
    #[command(args_override_self = true)]
    Critical(GbArgs),
}

#[derive(Debug, Args)]
pub struct GbArgs {
    #[arg(long, value_parser = parse_rat)]
    pub a: Rational,
    #[arg(long, value_parser = parse_rat)]
    pub b: Rational,
}

#[derive(Debug, Args)]
pub struct GbEstimateArgs {
    #[command(flatten)]
    pub ab: GbArgs,
    #[arg(long, default_value_t = 0)]
    pub i: u32,
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    #[arg(long)]
    pub n: u64,
    /// Estimate excursions back to the origin instead of all walks.
    #[arg(long)]
    pub excursion: bool,
}

#[derive(Debug, Args)]
pub struct GbHarmonicArgs {
    #[command(flatten)]
    pub ab: GbArgs,
    #[arg(long, default_value_t = 20)]
    pub grid: u32,
}

#[derive(Debug, Args)]
pub struct ConjectureArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest length used.
    #[arg(long, default_value_t = 5)]
    pub cap: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Only `gb` has closed forms.
    #[arg(long, default_value = "gb", value_parser = ["gb"])]
    pub model: String,
    #[arg(long, value_parser = parse_rat, default_value = "1")]
    pub a: Rational,
    #[arg(long, value_parser = parse_rat, default_value = "1")]
    pub b: Rational,
    #[arg(long, default_value_t = 0)]
    pub i: u32,
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    #[arg(long, default_value_t = 200)]
    pub n_max: u64,
    #[arg(long, value_parser = parse_target, default_value = "totals")]
    pub what: Target,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    /// Include every sampled length in the report.
    #[arg(long)]
    pub samples: bool,
}

fn parse_rat(s: &str) -> Result<Rational, String> {
    parse_decimal(s).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: orthant_walks::Error| e.to_string())
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: orthant_walks::Error| e.to_string())
}

/// Accepts plain integers and exact decimal or scientific forms such as `5e7`.
fn parse_guard(s: &str) -> Result<u128, String> {
    let r = parse_decimal(s).map_err(|e| e.to_string())?;
    if !r.is_integer() || r < Rational::from_integer(0.into()) {
        return Err(format!("guard must be a nonnegative integer, got {s:?}"));
    }
    r.to_integer().to_string().parse().map_err(|_| format!("guard too large: {s:?}"))
}
