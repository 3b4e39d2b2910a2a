//! `elastic`: simulations, spectral tables, identity checks, decay-rate
//! experiments and fits for the elastic flow of closed plane curves.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod experiment;
mod failure;
mod fit;
mod gap;
mod output;
mod simulate;
mod verify;

use failure::Failure;

const AFTER_HELP: &str = "\
Exit status: 0 on success, 1 when a check or bound fails or a run breaks down, \
2 on usage or configuration errors.
Set ELASTIC_THREADS to fix the number of worker threads (default: one per core).

Curve specs: circle, omega_circle:W[,R], ellipse:A,B, translated_circle:CX,CY[,W], \
perturbed:omega=W,m=M,eps=E[,phase=P], support:omega=W,m2=E2,m4=E4[,cx=X,cy=Y], \
sheared_circle:S, figure_eight, random:seed=S[,omega=W].";

#[derive(Parser, Debug)]
#[command(name = "elastic", version, about, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the free or rescaled flow from a curve and write its time series.
    #[command(after_help = AFTER_HELP)]
    Simulate(SimulateArgs),
    /// Lattice minimum of p(n/ω) and related constants.
    #[command(after_help = AFTER_HELP)]
    Gap(GapArgs),
    /// Identity, expansion or inequality checks; JSON report on stdout.
    #[command(after_help = AFTER_HELP)]
    Verify(VerifyArgs),
    /// Decay-rate experiments with a JSON verdict.
    #[command(after_help = AFTER_HELP)]
    Experiment(ExperimentArgs),
    /// Fit an exponential decay rate to one column of a series CSV.
    #[command(after_help = AFTER_HELP)]
    Fit(FitArgs),
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Flow configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Initial curve as a spec string.
    #[arg(long, default_value = "circle", conflicts_with = "curve_file")]
    pub curve: String,
    /// Initial curve as a JSON file of points, instead of --curve.
    #[arg(long)]
    pub curve_file: Option<PathBuf>,
    /// Samples used to build the curve from its spec.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Output directory.
    #[arg(long, default_value = "elastic-out")]
    pub out: PathBuf,
    /// Also write the curve at every output time to snapshots.json.
    #[arg(long, default_value_t = false)]
    pub dump_curves: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct GapArgs {
    /// Turning number.
    #[arg(long, required_unless_present = "table", conflicts_with = "table")]
    pub omega: Option<i64>,
    /// Enumeration window |n| ≤ M [default: max(2ω, 4)].
    #[arg(long)]
    pub n_max: Option<i64>,
    /// Range of turning numbers W1..W2, one report each.
    #[arg(long, value_name = "W1..W2")]
    pub table: Option<String>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identities,
    Expansion,
    Inequalities,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Which family of checks to run.
    #[arg(long, value_enum)]
    pub suite: Suite,
    /// Curve spec; fixes ω for the expansion and inequality suites.
    #[arg(long, default_value = "circle")]
    pub curve: String,
    /// Samples per curve or function.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Seed of a `random` curve, or first seed of the inequality family.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of seeds in the inequality family.
    #[arg(long, default_value_t = 100)]
    pub count: u64,
    /// Amplitude ladder of the expansion suite, strictly decreasing.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,5e-3,2.5e-3,1.25e-3")]
    pub ladder: Vec<f64>,
    /// Identities suite: add the finite-difference checks along the flow.
    #[arg(long, default_value_t = false)]
    pub with_flow: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum ExperimentName {
    ModeDecay,
    Translation,
    MainTheorem,
    Unrescaled,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Experiment to run.
    #[arg(long, value_enum)]
    pub name: ExperimentName,
    /// Parameters as inline JSON or a path to a JSON file.
    #[arg(long)]
    pub params: String,
    /// Output directory.
    #[arg(long, default_value = "elastic-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Series CSV written by `simulate` or `experiment`.
    #[arg(long)]
    pub series: PathBuf,
    /// Column to fit.
    #[arg(long, default_value = "e")]
    pub column: String,
    /// `auto`, or a time window T_A..T_B.
    #[arg(long, default_value = "auto")]
    pub window: String,
    /// Values at or below this are excluded.
    #[arg(long, default_value_t = elastic_core::fit::DEFAULT_FLOOR)]
    pub floor: f64,
}

/// Parse `A..B`.
pub fn parse_range<T: std::str::FromStr>(text: &str, what: &str) -> Result<(T, T), Failure> {
    let bad = || Failure::Usage(format!("{what} must look like A..B, got `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Check(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(a) => simulate::run(&a),
        Command::Gap(a) => gap::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Experiment(a) => experiment::run(&a),
        Command::Fit(a) => fit::run(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range::<i64>("1..9", "table").unwrap(), (1, 9));
        assert_eq!(parse_range::<f64>("0.5..2", "window").unwrap(), (0.5, 2.0));
        assert!(parse_range::<i64>("1-9", "table").is_err());
    }
}
