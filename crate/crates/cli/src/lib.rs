//! Command-line front end for the `fqre` toolkit.
//!
//! [`run`] parses an argument list, dispatches to one subcommand and writes either JSON or an
//! aligned table. Exit status: 0 on success, 1 when the computation is infeasible (no fit,
//! no convergence, data the method cannot use), 2 on usage errors and unreadable sources.

mod commands;
mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use output::round_significant;

/// Environment variable that replaces the default solver tolerance.
pub const TOLERANCE_ENV: &str = "FQRE_TOLERANCE";

#[derive(Debug, Parser)]
#[command(name = "fqre", version, about = "Focal quantal response equilibria for normal-form games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Focal logit equilibrium at one precision
    Solve(SolveArgs),
    /// Equilibria along the principal branch from lambda = 0 to --lambda
    Trace(SolveArgs),
    /// Regret-averse and Hurwicz focal sets with the sufficient-condition report
    Focal(FocalArgs),
    /// Fit (lambda, delta) to the observed frequencies
    Calibrate(CalibrateArgs),
    /// Classify strategies as focal or non-focal from observed play
    Identify(IdentifyArgs),
    /// Monotonicity tests that reject logit QRE or focal QRE
    Falsify(FalsifyArgs),
    /// Recompute the published quantities and compare
    Reproduce(ReproduceArgs),
    /// Check a game file
    Validate(ValidateArgs),
    /// List the bundled fixtures
    Catalog(OutputArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Bundled fixture name (see `catalog`)
    #[arg(long)]
    fixture: Option<String>,
    /// Game file in JSON
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GameArgs {
    #[command(flatten)]
    source: Source,
    /// Transfer of the traveler's dilemma fixture
    #[arg(long = "T", value_name = "R")]
    t: Option<f64>,
    /// Effort cost of the minimum-effort fixture
    #[arg(long = "c", value_name = "R")]
    c: Option<f64>,
    /// CRRA exponent applied to every payoff (u = x^gamma)
    #[arg(long, value_name = "R")]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct FocalFlags {
    /// Row focal set: comma-separated labels, `regret` or `hurwicz`
    #[arg(long, value_name = "LABELS")]
    focal_row: Option<String>,
    /// Column focal set: comma-separated labels, `regret` or `hurwicz`
    #[arg(long, value_name = "LABELS")]
    focal_col: Option<String>,
    /// Regret threshold factor for `regret` sets, in (0, 1]
    #[arg(long, value_name = "R", default_value_t = 1.0)]
    beta: f64,
    /// Optimism weight for `hurwicz` sets, in [0, 1]
    #[arg(long, value_name = "R", default_value_t = 0.5)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct DeltaFlags {
    /// Focal bias for every player
    #[arg(long, value_name = "R")]
    delta: Option<f64>,
    /// Focal bias of the row player (overrides --delta)
    #[arg(long, value_name = "R")]
    delta_row: Option<f64>,
    /// Focal bias of the column player (overrides --delta)
    #[arg(long, value_name = "R")]
    delta_col: Option<f64>,
}

#[derive(Debug, Args)]
struct SolverFlags {
    /// Sup-norm convergence tolerance (default from FQRE_TOLERANCE, else 1e-10)
    #[arg(long, value_name = "R")]
    tolerance: Option<f64>,
    /// Damping of the fixed-point iteration, in (0, 1]
    #[arg(long, value_name = "R")]
    damping: Option<f64>,
    /// Grid points of the lambda continuation
    #[arg(long, value_name = "N")]
    steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the output to this file instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Precision (the end of the path for `trace`)
    #[arg(long, value_name = "R", default_value_t = 1.0)]
    lambda: f64,
    #[command(flatten)]
    focal: FocalFlags,
    #[command(flatten)]
    delta: DeltaFlags,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct FocalArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Regret threshold factor, in (0, 1]
    #[arg(long, value_name = "R", default_value_t = 1.0)]
    beta: f64,
    /// Also report Hurwicz focal sets at this optimism weight
    #[arg(long, value_name = "R")]
    alpha: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Zero,
    Shared,
    PerPlayer,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    focal: FocalFlags,
    /// How focal biases are parameterized
    #[arg(long, value_enum, default_value_t = Policy::Shared)]
    policy: Policy,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Row pair `STRATEGY,ALTERNATIVE` for the cross-player test (needs --cross-col)
    #[arg(long, value_name = "S,S", requires = "cross_col")]
    cross_row: Option<String>,
    /// Column pair `STRATEGY,ALTERNATIVE` for the cross-player test (needs --cross-row)
    #[arg(long, value_name = "S,S", requires = "cross_row")]
    cross_col: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct FalsifyArgs {
    /// One 2x2 observation per occurrence: column frequency of the first strategy, then the row's
    #[arg(long, value_name = "P,Q", required = true)]
    pq: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// Run a single criterion
    #[arg(long, value_name = "N")]
    criterion: Option<u8>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    game: GameArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Core(#[from] fqre::Error),
}

impl CliError {
    fn status(&self) -> i32 {
        use fqre::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::InvalidParameter(_) | E::UnknownFixture(_) | E::Format(_) | E::Json(_) | E::Io(_) => 2,
                E::Domain(_) | E::Indeterminate(_) | E::Boundary(_) | E::MissingData(_) => 1,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// What a subcommand produced: machine and human renderings plus whether it succeeded.
struct Outcome {
    json: serde_json::Value,
    table: String,
    feasible: bool,
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let tolerance_env = std::env::var(TOLERANCE_ENV).ok();
    let (outcome, output) = match dispatch(cli.command, tolerance_env.as_deref()) {
        Ok(pair) => pair,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return e.status();
        }
    };
    let text = match output.format {
        Format::Json => output::to_json_text(&outcome.json),
        Format::Table => outcome.table,
    };
    match &output.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                let _ = writeln!(err, "error: cannot write `{}`: {e}", path.display());
                return 2;
            }
        }
        None => {
            if out.write_all(text.as_bytes()).is_err() {
                return 2;
            }
        }
    }
    if outcome.feasible {
        0
    } else {
        1
    }
}

fn dispatch(command: Command, tolerance_env: Option<&str>) -> CliResult<(Outcome, OutputArgs)> {
    Ok(match command {
        Command::Solve(a) => (commands::solve(&a, tolerance_env)?, a.output),
        Command::Trace(a) => (commands::trace(&a, tolerance_env)?, a.output),
        Command::Focal(a) => (commands::focal(&a)?, a.output),
        Command::Calibrate(a) => (commands::calibrate(&a, tolerance_env)?, a.output),
        Command::Identify(a) => (commands::identify(&a)?, a.output),
        Command::Falsify(a) => (commands::falsify(&a)?, a.output),
        Command::Reproduce(a) => (commands::reproduce(&a)?, a.output),
        Command::Validate(a) => (commands::validate(&a)?, a.output),
        Command::Catalog(a) => (commands::catalog(), a),
    })
}
