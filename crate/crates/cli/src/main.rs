//! `qgraph`: spectra of periodic quantum graphs from the command line.
//!
//! Exit status: 0 on success, 2 on usage errors, 3 when a computation does
//! not converge, 1 when an output file cannot be written.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod length;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qgraph::graph_file::parse_real;

use crate::length::Length;

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "QGRAPH_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Library error, attributed to `flag` when it concerns the input.
    pub fn lib(flag: &str, e: qgraph::Error) -> Self {
        match e {
            qgraph::Error::NonConvergence(m) => CliError::Numeric(format!("numerical non-convergence: {m}")),
            qgraph::Error::GraphFile { .. } | qgraph::Error::Graph(_) => CliError::Usage(format!("{flag}: {e}")),
            other => CliError::Usage(format!("{flag}: {other}")),
        }
    }
}

fn real(s: &str) -> Result<f64, String> {
    parse_real(s)
}

fn positive(s: &str) -> Result<f64, String> {
    let x = parse_real(s)?;
    if x > 0.0 { Ok(x) } else { Err(format!("`{s}` must be positive")) }
}

fn length(s: &str) -> Result<Length, String> {
    Length::parse(s)
}

/// `p/q` in lowest terms with `q ≥ 1`.
fn fraction(s: &str) -> Result<(i64, u64), String> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: i64 = p.trim().parse().map_err(|_| format!("`{s}` is not a fraction p/q"))?;
    let q: u64 = q.trim().parse().map_err(|_| format!("`{s}` is not a fraction p/q"))?;
    if q == 0 {
        return Err(format!("`{s}` has a zero denominator"));
    }
    if num_integer::gcd(p.unsigned_abs(), q) != 1 {
        return Err(format!("`{s}` is not in lowest terms"));
    }
    Ok((p, q))
}

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Spectra of periodic quantum graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Closed-form spectral condition.
    Closed,
    /// Generic Floquet secular determinant.
    Engine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Square,
    Hex,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the result here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write an SVG figure.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnergyRange {
    #[arg(long, default_value = "0", value_parser = real, allow_hyphen_values = true)]
    pub emin: f64,
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub emax: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Magnetic ring chain: bands, gaps and flat bands.
    Chain(ChainArgs),
    /// Hofstadter butterfly of the critical almost Mathieu operator.
    Butterfly(ButterflyArgs),
    /// Bands of one almost Mathieu operator at rational frequency.
    Amo(AmoArgs),
    /// Gaps of the rectangular δ-lattice up to an energy.
    LatticeGaps(LatticeGapsArgs),
    /// Bethe–Sommerfeld coupling window of the rectangular lattice.
    BsWindow(BsWindowArgs),
    /// Star graph with cyclic-shift coupling: S-matrix and eigenvalues.
    Star(StarArgs),
    /// Square or honeycomb lattice with cyclic-shift coupling.
    TrvBands(TrvArgs),
    /// Generic secular-determinant scan of a graph file.
    Scan(ScanArgs),
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Constant flux A.
    #[arg(long, value_parser = real, allow_hyphen_values = true, conflicts_with = "mu", required_unless_present = "mu")]
    pub flux: Option<f64>,
    /// Rational flux slope p/q, with A_j = (p/q) j + theta.
    #[arg(long, value_parser = fraction, allow_hyphen_values = true)]
    pub mu: Option<(i64, u64)>,
    #[arg(long, default_value = "0", value_parser = real, allow_hyphen_values = true, requires = "mu")]
    pub theta: f64,
    #[command(flatten)]
    pub range: EnergyRange,
    /// Momentum step for the engine and for plotted curves.
    #[arg(long, default_value = "0.01", value_parser = positive)]
    pub resolution: f64,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ButterflyArgs {
    #[arg(long, default_value_t = 20)]
    pub qmax: u64,
    /// Bloch phases per row.
    #[arg(long, default_value_t = 512)]
    pub phases: usize,
    #[arg(long, default_value = "2", value_parser = real, allow_hyphen_values = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct AmoArgs {
    #[arg(long, value_parser = fraction, allow_hyphen_values = true)]
    pub mu: (i64, u64),
    #[arg(long, default_value = "2", value_parser = real, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, default_value = "0", value_parser = real, allow_hyphen_values = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 512)]
    pub phases: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LatticeGapsArgs {
    #[arg(long, value_parser = length)]
    pub a: Length,
    #[arg(long, value_parser = length)]
    pub b: Length,
    #[arg(long, value_parser = real, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, value_parser = positive)]
    pub emax: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct BsWindowArgs {
    #[arg(long, value_parser = length)]
    pub a: Length,
    #[arg(long, value_parser = length)]
    pub b: Length,
    /// Truncation of the infima defining the gamma bounds.
    #[arg(long, default_value_t = 100)]
    pub mmax: u64,
    /// Continued-fraction depth for the Markov constant.
    #[arg(long, default_value_t = 40)]
    pub depth: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StarArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "1", value_parser = positive)]
    pub k: f64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrvArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Edge length.
    #[arg(long = "length", value_parser = positive)]
    pub length: f64,
    #[command(flatten)]
    pub range: EnergyRange,
    #[arg(long, default_value = "0.01", value_parser = positive)]
    pub resolution: f64,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Graph description (TOML).
    #[arg(long, value_name = "PATH")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub range: EnergyRange,
    #[arg(long, default_value = "0.01", value_parser = positive)]
    pub resolution: f64,
    /// Coarse quasimomentum grid per dimension.
    #[arg(long, default_value_t = 32)]
    pub theta_grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the raw grid samples as CSV.
    #[arg(long, value_name = "PATH")]
    pub samples: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            qgraph::par::configure_threads(n);
            Ok(())
        }
        _ => Err(CliError::Usage(format!("{THREADS_ENV}: `{v}` is not a positive integer"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Chain(a) => commands::chain(&a),
        Command::Butterfly(a) => commands::butterfly(&a),
        Command::Amo(a) => commands::amo(&a),
        Command::LatticeGaps(a) => commands::lattice_gaps(&a),
        Command::BsWindow(a) => commands::bs_window(&a),
        Command::Star(a) => commands::star(&a),
        Command::TrvBands(a) => commands::trv_bands(&a),
        Command::Scan(a) => commands::scan(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
