//! `gbi`: command-line front end for the bound information laboratory.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gbi_core::GbiError;

#[derive(Parser, Debug)]
#[command(
    name = "gbi",
    version,
    about = "Gaussian multipartite bound information laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print X(r), Γ(r) or the reduced three-mode covariance matrix.
    Matrix {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, value_enum, default_value = "x", ignore_case = true)]
        what: MatrixKind,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Information differences along an r grid.
    Sweep {
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Sign-change thresholds of the five scenarios.
    Thresholds {
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Run the invariant suite.
    Verify {
        /// Grid as `min:max:steps`.
        #[arg(long, value_name = "MIN:MAX:STEPS")]
        r_grid: Option<String>,
        /// Skip the threshold checks.
        #[arg(long)]
        skip_thresholds: bool,
        /// Test hook: add DELTA to X[ROW][COL] and its mirror before checking.
        #[arg(
            long,
            hide = true,
            value_name = "ROW,COL,DELTA",
            allow_hyphen_values = true
        )]
        corrupt: Option<String>,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Monte Carlo run of a protocol or of the full distribution.
    Simulate {
        #[arg(long, value_enum, default_value = "b-ac")]
        protocol: ProtocolArg,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Partial-transpose test of the three bipartitions of the A, B, C state.
    Ppt {
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        r: f64,
        /// Test the three-mode vacuum instead.
        #[arg(long)]
        vacuum: bool,
        #[command(flatten)]
        io: OutputArgs,
    },
    /// Linear decomposition of one of Eve's variables.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long)]
        j: u8,
        #[command(flatten)]
        io: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    r_min: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    r_max: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    /// Human-readable; `verify` and `decompose` only.
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MatrixKind {
    /// 5×5 position covariance of the purification.
    X,
    /// 10×10 covariance matrix X ⊕ X⁻¹.
    Gamma,
    /// 6×6 covariance matrix of modes A, B, C.
    Reduced,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProtocolArg {
    #[value(name = "b-ac")]
    BAc,
    #[value(name = "c-ab")]
    CAb,
    Full,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
enum CliError {
    /// Exit 1.
    Failed(String),
    /// Exit 2.
    Usage(String),
    /// Exit 3.
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Failed(m) | CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<GbiError> for CliError {
    fn from(e: GbiError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn init_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("GBI_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "GBI_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Matrix { r, what, io } => commands::matrix(r, what, &io),
        Command::Sweep { range, io } => commands::sweep(&range, &io),
        Command::Thresholds { tol, io } => commands::thresholds(tol, &io),
        Command::Verify {
            r_grid,
            skip_thresholds,
            corrupt,
            io,
        } => commands::verify(r_grid.as_deref(), skip_thresholds, corrupt.as_deref(), &io),
        Command::Simulate {
            protocol,
            r,
            samples,
            seed,
            io,
        } => commands::simulate(protocol, r, samples, seed, &io),
        Command::Ppt { r, vacuum, io } => commands::ppt(r, vacuum, &io),
        Command::Decompose { r, j, io } => commands::decompose(r, j, &io),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gbi: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
