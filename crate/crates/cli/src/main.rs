//! `i3`: compute, compare, rank, and correlate percentile-class citation indicators.
//!
//! Exit codes: 0 on success, 1 on data errors (unreadable or invalid input,
//! unknown units), 2 on usage errors (bad flags, unparsable schemes).
//! Diagnostics go to stderr; results go to stdout or `--output`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use i3_core::report::OutputFormat;
use i3_core::CountingMode;

#[derive(Debug, Parser)]
#[command(
    name = "i3",
    version,
    about = "Percentile-class citation impact indicators (I3 family)"
)]
struct Cli {
    /// Worker threads for per-unit computations (results do not depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Class counts and I3 values for every unit
    Compute(ComputeArgs),
    /// Statistical comparison of one unit with another or with expectation
    Compare(CompareArgs),
    /// Units ranked by an indicator
    Rank(RankArgs),
    /// Spearman correlations between indicators and external metrics
    Correlate(CorrelateArgs),
    /// Write a seeded synthetic publications file
    Simulate(SimulateArgs),
    /// Report anomalies in a publications file and optional metrics file
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Markdown,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Markdown => OutputFormat::Markdown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    AtOrAbove,
    Fractional,
}

impl From<ModeArg> for CountingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::AtOrAbove => CountingMode::AtOrAbove,
            ModeArg::Fractional => CountingMode::FractionalTies,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizeArg {
    Global,
    Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Publications file (`paper_id,unit_id,citations,categories`)
    #[arg(long, short)]
    input: PathBuf,

    #[arg(long, value_enum, default_value = "csv")]
    input_format: InputFormatArg,
}

#[derive(Debug, Args)]
struct IndicatorArgs {
    /// Preset name (I3STAR, PR6, QUANTILE4, LINEAR4, PTOP10) or a PR-W list such as 99-100,90-10,50-2,0-1
    #[arg(long, default_value = "I3STAR")]
    scheme: String,

    /// Treatment of papers tied at a threshold (global normalization only) [default: at-or-above]
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,

    /// Percentile thresholds over the whole corpus or per subject category
    #[arg(long, value_enum, default_value = "global")]
    normalize: NormalizeArg,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,

    /// Write to this file instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    indicator: IndicatorArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Only report this unit
    #[arg(long)]
    unit: Option<String>,

    /// With --unit: show the class-by-class calculation, global and field-normalized
    #[arg(long, requires = "unit")]
    breakdown: bool,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    indicator: IndicatorArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// First unit
    unit_a: String,

    /// Second unit (omit with --expected)
    unit_b: Option<String>,

    /// Compare the first unit with the nominal class shares
    #[arg(long, conflicts_with = "unit_b")]
    expected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RankKey {
    #[value(name = "i3")]
    I3,
    #[value(name = "i3_per_n")]
    I3PerN,
    #[value(name = "i3_field")]
    I3Field,
}

#[derive(Debug, Args)]
struct RankArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    indicator: IndicatorArgs,
    #[command(flatten)]
    output: OutputArgs,

    #[arg(long, value_enum, default_value = "i3")]
    by: RankKey,

    /// Number of rows to keep
    #[arg(long)]
    top: Option<usize>,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    indicator: IndicatorArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// External metrics file (`unit_id,n_pub,n_cit,jif2,jif5`)
    #[arg(long)]
    metrics: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: u64,

    #[arg(long, default_value_t = 10)]
    units: usize,

    #[arg(long, default_value_t = 100)]
    papers_min: usize,

    #[arg(long, default_value_t = 100)]
    papers_max: usize,

    #[arg(long, default_value_t = 3)]
    categories: usize,

    /// Location of log-citations
    #[arg(long, default_value_t = 1.5)]
    mu: f64,

    /// Spread of log-citations within a unit
    #[arg(long, default_value_t = 1.2)]
    sigma: f64,

    /// Spread of unit-level shifts of the location
    #[arg(long, default_value_t = 0.5)]
    unit_spread: f64,

    /// Chance of a second category per paper
    #[arg(long, default_value_t = 0.2)]
    multi_category_rate: f64,

    /// Publications file to write
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long)]
    metrics: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Data(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::run(cli.command)),
            Err(e) => Err(CliError::Usage(format!(
                "cannot start {n} worker threads: {e}"
            ))),
        },
        None => commands::run(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
