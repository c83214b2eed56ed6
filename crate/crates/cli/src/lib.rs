//! Command-line front end: classification, tip traces, validation and
//! boundary-image export for slit families.

pub mod commands;
pub mod output;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NEAR_DEGENERATE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_CONTINUATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "loewner", version, about = "Multiple-slit Loewner flows with square-root driving")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Locate the zeros of P and report the case.
    Classify(Common),
    /// Trace tip trajectories and fit their approach angles.
    Trace(Common),
    /// Run the consistency checks and print a pass/fail table.
    Validate(Common),
    /// Sample h along the real line.
    ExportImage(Common),
    /// Execute a saved run manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Options shared by every command; a run manifest stores exactly these.
#[derive(Args, Debug, Clone, Serialize, Deserialize, Default)]
pub struct Common {
    /// Slit family (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Truncation for parametric families.
    #[arg(long = "n-trunc")]
    #[serde(default)]
    pub n_trunc: Option<usize>,
    /// Last time of the trace grid.
    #[arg(long = "t-max")]
    #[serde(default)]
    pub t_max: Option<f64>,
    /// Replace the default grids: points in log-time for traces, scan points for images.
    #[arg(long = "grid-points")]
    #[serde(default)]
    pub grid_points: Option<usize>,
    /// Scaled margin below which a root decision counts as degenerate.
    #[arg(long)]
    #[serde(default)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Slit indices counted from 1 in increasing order of k, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub slits: Vec<usize>,
    /// Seed for randomized sampling.
    #[arg(long, default_value_t = 0x5eed)]
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Cap on log-time when tracing past the grid toward the limit.
    #[arg(long = "tau-max")]
    #[serde(default)]
    pub tau_max: Option<f64>,
    /// Print the report as JSON.
    #[arg(long)]
    #[serde(default)]
    pub json: bool,
    #[arg(long = "inject-fault", hide = true)]
    #[serde(default)]
    pub inject_fault: Option<String>,
}

fn default_seed() -> u64 {
    0x5eed
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    #[serde(flatten)]
    pub options: Common,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    if let Ok(v) = std::env::var("LOEWNER_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    let result = match cli.command {
        Command::Run { manifest } => commands::run_manifest(&manifest),
        Command::Classify(c) => commands::dispatch("classify", &c),
        Command::Trace(c) => commands::dispatch("trace", &c),
        Command::Validate(c) => commands::dispatch("validate", &c),
        Command::ExportImage(c) => commands::dispatch("export-image", &c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_CONFIG
        }
    }
}
