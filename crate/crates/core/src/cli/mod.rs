//! The `lowt` command-line interface.

mod commands;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use commands::{CoeffsConfig, GreenConfig, VerifyConfig, VerifyOutput};

/// Environment variable naming the default directory for Green tables.
pub const TABLE_DIR_ENV: &str = "LOWT_TABLE_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Validation(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "lowt", version, about = "Low-temperature series for O(N) spin models")]
pub struct Cli {
    /// Worker threads; 1 gives the deterministic reference output.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the lattice Green function on a box.
    Green(GreenArgs),
    /// Series coefficients of a spin observable.
    Coeffs(CoeffsArgs),
    /// Run a Monte Carlo chain.
    Simulate(SimulateArgs),
    /// Compare series coefficients with Monte Carlo runs.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GreenArgs {
    /// JSON config file; replaces the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub mass: f64,
    #[arg(long, default_value_t = 20)]
    pub radius: u32,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output table; defaults to a name inside $LOWT_TABLE_DIR.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Green table; relative paths are also looked up in $LOWT_TABLE_DIR.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long = "N", alias = "n-components", default_value_t = 3)]
    pub n_components: usize,
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Observable as a JSON file or inline JSON; defaults to S_0^N.
    #[arg(long)]
    pub observable: Option<String>,
    /// Radius of the outermost vertex sum.
    #[arg(long, default_value_t = 12)]
    pub radius: i32,
    /// Full comma-separated radius schedule; overrides --radius.
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<i32>>,
    #[arg(long, default_value_t = 0.0)]
    pub prune_tol: f64,
    /// Skip the half-radius evaluation used for truncation uncertainties.
    #[arg(long)]
    pub no_richardson: bool,
    /// Coefficient JSON output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long = "N", alias = "n-components", default_value_t = 3)]
    pub n_components: usize,
    #[arg(long = "L", alias = "side", default_value_t = 16)]
    pub l: usize,
    #[arg(long = "T", alias = "temperature")]
    pub temperature: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub h: f64,
    #[arg(long, default_value_t = 10_000)]
    pub sweeps: usize,
    #[arg(long)]
    pub thermalization: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub measure_every: usize,
    #[arg(long, default_value = "heatbath")]
    pub algorithm: String,
    #[arg(long, default_value_t = 1)]
    pub overrelax: usize,
    /// Start from uniformly random spins instead of the ordered state.
    #[arg(long)]
    pub hot_start: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raw per-measurement dump as CSV.
    #[arg(long)]
    pub samples_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Coefficient file written by `lowt coeffs`.
    #[arg(long)]
    pub coeffs: Option<PathBuf>,
    /// Simulation results written by `lowt simulate`.
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    /// Truncation order; defaults to the highest available.
    #[arg(long)]
    pub order: Option<usize>,
    /// Required log-log slope; defaults to order + 0.5.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, default_value = "m_abs")]
    pub estimator: String,
    /// Replace a_0..a_2 by their torus values (`torus`) or keep them (`none`).
    #[arg(long, default_value = "torus")]
    pub finite_size: String,
    /// Exponent of the moment-bound check.
    #[arg(long, default_value_t = 1.0)]
    pub moment_a: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Resolve a table path, falling back to `$LOWT_TABLE_DIR/<path>` for
/// relative paths that do not exist.
pub fn resolve_table(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Ok(dir) = std::env::var(TABLE_DIR_ENV) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Other(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    if cli.threads == 0 {
        return Err(CliError::Validation("--threads must be >= 1".into()));
    }
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    let parallel = cli.threads > 1;
    match cli.command {
        Command::Green(a) => commands::green(a),
        Command::Coeffs(a) => commands::coeffs(a, parallel),
        Command::Simulate(a) => commands::simulate(a),
        Command::Verify(a) => commands::verify(a),
    }
}

/// Parse `args`, run, print errors, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
