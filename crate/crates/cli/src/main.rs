mod commands;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use b3m_core::frontier::{Method, Tolerance};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Shared EV charging: instance generation, efficient frontiers,
/// bargaining and reports.
#[derive(Debug, Parser)]
#[command(name = "b3m", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded two-company charging instance.
    Generate(GenerateArgs),
    /// Compute an exact or reduced efficient frontier.
    Frontier(FrontierArgs),
    /// Select one agreement point from a frontier.
    Bargain(BargainArgs),
    /// Exhaustive ground truth for small instances.
    Oracle(OracleArgs),
    /// Run every method on a batch of instances and tabulate NDP, CPU, Gap and CTS.
    Report(ReportArgs),
    /// Write one objective of an instance's program in LP format.
    ExportLp(ExportLpArgs),
    /// Read an external solver's solution and decode it into a schedule.
    ImportSolution(ImportArgs),
    /// Check a schedule against an instance.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvDistArg {
    Uniform,
    Clustered,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutArg {
    Uniform,
    Centralized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Gnb,
    Dist,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// Scenario config JSON; flags given alongside it take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub ev_dist: Option<EvDistArg>,
    #[arg(long, value_enum)]
    pub charger_layout: Option<LayoutArg>,
    #[arg(long)]
    pub n_evs: Option<usize>,
    #[arg(long)]
    pub n_chargers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Small-horizon preset (6 intervals, short sessions) for exhaustive checks.
    #[arg(long, conflicts_with = "config")]
    pub desk: bool,
    #[arg(long)]
    pub horizon: Option<i64>,
    /// Hourly prices, CSV with header `hour,price` in SEK/kWh.
    #[arg(long)]
    pub prices: Option<PathBuf>,
    /// Energy-fee scaling factor.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Value of time, SEK per hour.
    #[arg(long)]
    pub vot: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FrontierArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Tolerance range in percent, e.g. `3` or `2.5`.
    #[arg(long, value_parser = parse_tolerance, default_value = "0")]
    pub epsilon: Tolerance,
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Defaults to the instance's directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BargainArgs {
    #[arg(long)]
    pub frontier: PathBuf,
    /// Instance the frontier was computed on; supplies the disagreement and ideal points.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// `z1,z2` in minor units, when no instance is given.
    #[arg(long, value_parser = parse_point, conflicts_with = "instance")]
    pub disagreement: Option<(i64, i64)>,
    /// `z1,z2` in minor units, when no instance is given.
    #[arg(long, value_parser = parse_point, conflicts_with = "instance")]
    pub ideal: Option<(i64, i64)>,
    /// Pick one run out of a multi-run frontier file.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,
    #[arg(long, value_parser = parse_tolerance)]
    pub epsilon: Option<Tolerance>,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Bargaining power of company 1, strictly between 0 and 1.
    #[arg(long, required_if_eq("mode", "gnb"))]
    pub pi: Option<f64>,
    /// Norm order, or `inf`.
    #[arg(long, required_if_eq("mode", "dist"))]
    pub alpha: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Maximum number of candidate combinations to enumerate.
    #[arg(long, default_value_t = b3m_core::oracle::DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Directory of instance JSON files.
    #[arg(long)]
    pub batch: PathBuf,
    /// Tolerance ranges for the reduced methods; repeatable.
    #[arg(long = "epsilon", value_parser = parse_tolerance, default_value = "3")]
    pub epsilons: Vec<Tolerance>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Instances solved concurrently.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportLpArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value = "1")]
    pub objective: u8,
    /// Add the participation bounds as constraints.
    #[arg(long)]
    pub participation: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ImportArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// `name value` listing produced by an external solver.
    #[arg(long, required_unless_present = "run_solver")]
    pub solution: Option<PathBuf>,
    /// Export the LP, run the solver named by B3M_SOLVER on it, then import.
    #[arg(long, conflicts_with = "solution")]
    pub run_solver: bool,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2), default_value = "1")]
    pub objective: u8,
    #[arg(long)]
    pub participation: bool,
    /// Schedule JSON to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub schedule: PathBuf,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: b3m_core::FrontierError| e.to_string())
}

fn parse_tolerance(s: &str) -> Result<Tolerance, String> {
    s.parse().map_err(|e: b3m_core::FrontierError| e.to_string())
}

fn parse_point(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `z1,z2`, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("`{t}` is not an integer"));
    Ok((num(a)?, num(b)?))
}

/// Exit status 1: the inputs were well-formed but the pipeline could not
/// produce a result. Exit status 2: the command line itself is wrong.
pub enum Failure {
    Usage(String),
    Domain(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Frontier(a) => commands::frontier(&a),
        Command::Bargain(a) => commands::bargain(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Report(a) => report::run(&a),
        Command::ExportLp(a) => commands::export_lp_file(&a),
        Command::ImportSolution(a) => commands::import_solution(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
