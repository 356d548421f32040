//! Command-line front end: parses a config file and flags, dispatches to the library.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use octoport::circuit::Mode;
use octoport::mc_sim::Regime;
use thiserror::Error;

pub use config::FileConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] octoport::Error),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("validation failed: {0} check(s) did not pass")]
    Validation(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 4,
            CliError::Validation(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    FiniteLo,
    StrongLo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Double,
    Single,
}

#[derive(Debug, Parser)]
#[command(name = "octoport", version, about = "Eight-port homodyne simulator and min-entropy calculator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file with flat keys (eta1..eta4, lambda_abs2, kappa_resp, ...).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of samples `m`.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub regime: Option<RegimeArg>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a batch of photocurrents.
    Simulate,
    /// Analytic vacuum noise budget.
    Moments,
    /// Full entropy report.
    Entropy,
    /// Entropy tables: 1 reference entropy, 2 saturation ratio, 3 single channel.
    Tables {
        #[arg(long)]
        which: u32,
    },
    /// Loss curves for figure sets 2 to 7.
    Figures {
        #[arg(long)]
        which: u32,
    },
    /// Laser field and RIN spectra.
    Spectra,
    /// Simulate, digitize and hash to nearly uniform bits.
    Extract,
    /// Cross-check the library against independent routes.
    Validate,
}

impl Cli {
    /// File config with flag overrides applied.
    pub fn effective_config(&self) -> Result<FileConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        if let Some(s) = self.seed {
            c.seed = Some(s);
        }
        if let Some(m) = self.samples {
            c.m = Some(m);
        }
        if let Some(r) = self.regime {
            c.regime = Some(match r {
                RegimeArg::FiniteLo => Regime::FiniteLo,
                RegimeArg::StrongLo => Regime::StrongLo,
            });
        }
        if let Some(m) = self.mode {
            c.mode = Some(match m {
                ModeArg::Double => Mode::Double,
                ModeArg::Single => Mode::Single,
            });
        }
        Ok(c)
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("OCTOPORT_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("OCTOPORT_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Config("OCTOPORT_THREADS must be positive".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Config(e.to_string()))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| commands::dispatch(&cli)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("octoport: {e}");
            e.exit_code()
        }
    }
}
