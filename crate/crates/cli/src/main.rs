//! `phonodist`: rank-frequency fits, entropy estimates, phoneme features,
//! maximum-entropy guesses and cross-language reports.
//!
//! Exit codes: 0 success, 2 usage, 3 input or domain error, 4 numerical
//! failure or infeasible problem.

mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "phonodist", version, about, propagate_version = true)]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the Dirichlet concentration of one frequency table.
    FitAlpha(FitAlphaArgs),
    /// Concentration predicted by the scaling law for an inventory size.
    PredictAlpha(PredictArgs),
    /// Rank-frequency table predicted from inventory size alone.
    Reconstruct(ReconstructArgs),
    /// Plug-in and coverage-adjusted entropy of a frequency table.
    EstimateEntropy(EntropyArgs),
    /// Per-phoneme feature table from a lexicon and an incidence table.
    Features(FeaturesArgs),
    /// Maximum-entropy distribution matching a feature table's expectations.
    Maxent(MaxentArgs),
    /// Log-log regression of fitted concentrations on inventory size.
    Regress(RegressArgs),
    /// Entropy, concentration and optional maxent summary for many languages.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone, Copy)]
pub struct LawArgs {
    /// Scaling-law coefficient `a` in `alpha = a * n^b`.
    #[arg(long, default_value_t = 19.47, value_parser = positive)]
    pub coeff_a: f64,
    /// Scaling-law exponent `b`.
    #[arg(long, default_value_t = -0.95, allow_hyphen_values = true, value_parser = finite)]
    pub exponent_b: f64,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct SolverArgs {
    /// Convergence tolerance on the constraint residuals.
    #[arg(long, default_value_t = 1e-10, value_parser = positive)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Args, Debug)]
pub struct FitAlphaArgs {
    /// Frequency table (`phoneme<TAB>count`).
    pub table: PathBuf,
    /// Declared inventory size; defaults to the number of observed phonemes.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: Option<u64>,
    /// Language name; defaults to the file stem.
    #[arg(long)]
    pub language: Option<String>,
    /// Central interval level for the rank bands.
    #[arg(long, default_value_t = 0.95, value_parser = unit_interval)]
    pub level: f64,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    #[command(flatten)]
    pub law: LawArgs,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    #[command(flatten)]
    pub law: LawArgs,
    #[arg(long, default_value_t = 0.95, value_parser = unit_interval)]
    pub level: f64,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    pub table: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: Option<u64>,
    #[arg(long)]
    pub language: Option<String>,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    /// Lexicon (`count<TAB>ph ph ...`).
    pub lexicon: PathBuf,
    /// Incidence table (`phoneme<TAB>languages_with<TAB>languages_total`).
    pub incidence: PathBuf,
    /// Minimum fraction of observed phonemes with an incidence row.
    #[arg(long, default_value_t = 0.85, value_parser = unit_closed)]
    pub coverage_floor: f64,
}

#[derive(Args, Debug)]
pub struct MaxentArgs {
    /// Feature table as written by `features`.
    pub table: PathBuf,
    /// Inventory size used for relative entropies; defaults to the table length.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: Option<u64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct RegressArgs {
    /// TSV with `n` and `alpha_hat` columns, such as `report --format tsv`.
    pub fits: PathBuf,
    /// Column holding a family label; adds a fit with per-family intercepts.
    #[arg(long)]
    pub group_column: Option<String>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Frequency tables, one per language.
    #[arg(required = true)]
    pub tables: Vec<PathBuf>,
    /// Feature tables, one per frequency table and in the same order.
    #[arg(long = "features", value_name = "PATH")]
    pub features: Vec<PathBuf>,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, default_value_t = 0.95, value_parser = unit_interval)]
    pub level: f64,
    #[command(flatten)]
    pub law: LawArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{e}"))
}

fn finite(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    v.is_finite().then_some(v).ok_or_else(|| "must be finite".into())
}

fn positive(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    (v > 0.0).then_some(v).ok_or_else(|| "must be positive".into())
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (v > 0.0 && v < 1.0).then_some(v).ok_or_else(|| "must lie strictly between 0 and 1".into())
}

fn unit_closed(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    (0.0..=1.0).contains(&v).then_some(v).ok_or_else(|| "must lie in [0, 1]".into())
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, source: std::io::Error },
    Lib { context: String, source: phonodist::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn lib(context: impl fmt::Display, source: phonodist::Error) -> Self {
        CliError::Lib {
            context: context.to_string(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        use phonodist::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Lib { source, .. } => match source {
                E::Ingest { .. } | E::Schema(_) | E::Domain(_) => 3,
                E::Numerical(_) | E::Infeasible(_) => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Lib { context, source } if context.is_empty() => write!(f, "{source}"),
            CliError::Lib { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl From<phonodist::Error> for CliError {
    fn from(source: phonodist::Error) -> Self {
        CliError::lib("", source)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::FitAlpha(a) => commands::fit_alpha(a)?,
        Command::PredictAlpha(a) => commands::predict_alpha(a)?,
        Command::Reconstruct(a) => commands::reconstruct(a)?,
        Command::EstimateEntropy(a) => commands::estimate_entropy(a)?,
        Command::Features(a) => commands::features(a)?,
        Command::Maxent(a) => commands::maxent(a)?,
        Command::Regress(a) => commands::regress(a)?,
        Command::Report(a) => commands::report(a)?,
    };
    output::emit(cli.output.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phonodist: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
