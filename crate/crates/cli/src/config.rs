use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use arborlab::counting::{read_cache, write_cache, TableCaps, DEFAULT_EXACT_CAP};
use arborlab::{AnalyticError, BallError, CountError, CountTable, Mode, SampleError, TreeError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

/// Largest scaled table the CLI materializes; bigger partition-function runs stream.
pub const CLI_MATERIALIZE_CAP: usize = 4096;
pub const DEFAULT_ASYMPTOTIC_N: usize = 4096;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0} failing properties")]
    VerifyFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            _ => 2,
        }
    }
}

pub fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "arborlab", version, about = "Height-weighted random planar trees: counts, constants, samples, ball masses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Height exponent α in the weight h(T)^α.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Tree size N (number of edges).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Size range `A:B` or `A:B:STEP`, inclusive.
    #[arg(long = "n-range", global = true)]
    pub n_range: Option<String>,
    /// Arithmetic mode; defaults to exact up to N = 256 and scaled above.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub stream: u64,
    /// Directory for cached count tables.
    #[arg(long, global = true, env = "ARBORLAB_CACHE")]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Tolerance override for quadrature and verification checks.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// L(N, m) and E(N, h) rows.
    Count,
    /// Partition functions Z_N(α).
    Zn,
    /// Singular constants c_α and C_α.
    Constants,
    /// Exact draws from μ_N, one JSON line per tree.
    Sample {
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Mass of the metric ball around a finite tree.
    Ball {
        /// Base tree as a comma-separated preorder child-count code, e.g. `2,0,0`.
        #[arg(long)]
        t0: String,
        /// Sweep `N1:N2:STEP`, emitted as CSV.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long, value_enum, default_value_t = MethodArg::Dp)]
        method: MethodArg,
        /// Draws for the empirical method.
        #[arg(long, default_value_t = 10_000)]
        draws: u64,
    },
    /// Z_N N^{(3-α)/2} 4^{-N} against C_α.
    Asymptotics,
    /// Runs the invariant suite and reports each property.
    Verify,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Zn => "zn",
            Command::Constants => "constants",
            Command::Sample { .. } => "sample",
            Command::Ball { .. } => "ball",
            Command::Asymptotics => "asymptotics",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Scaled,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Scaled => Mode::Scaled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Dp,
    Bruteforce,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NRange {
    pub start: usize,
    pub end: usize,
    pub step: usize,
}

impl NRange {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| config_error(format!("bad range component {s:?} in {text:?}")))
        };
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, s] => (num(a)?, num(b)?, num(s)?),
            _ => return Err(config_error(format!("range {text:?} is not A:B or A:B:STEP"))),
        };
        if start == 0 || start > end || step == 0 {
            return Err(config_error(format!("range {text:?} needs 1 <= A <= B and STEP >= 1")));
        }
        Ok(NRange { start, end, step })
    }

    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step).collect()
    }
}

/// The fully resolved configuration, echoed in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub alpha: f64,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "N_range", skip_serializing_if = "Option::is_none")]
    pub n_range: Option<NRange>,
    pub mode: Mode,
    pub seed: u64,
    pub stream: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<String>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Subcommand-specific arguments.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub args: serde_json::Value,
}

impl RunConfig {
    pub fn resolve(command: &Command, args: &CommonArgs) -> Result<Self, CliError> {
        let alpha = args.alpha.unwrap_or(0.0);
        if !alpha.is_finite() {
            return Err(config_error("alpha must be finite"));
        }
        if args.n.is_some() && args.n_range.is_some() {
            return Err(config_error("give either --n or --n-range, not both"));
        }
        let n_range = args.n_range.as_deref().map(NRange::parse).transpose()?;
        if args.n == Some(0) {
            return Err(config_error("N must be at least 1"));
        }
        if let Some(tol) = args.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(config_error("tolerance must be positive"));
            }
        }
        let needs_alpha = matches!(command, Command::Constants | Command::Asymptotics);
        if needs_alpha && args.alpha.is_none() {
            return Err(config_error(format!("{} needs --alpha", command.name())));
        }
        let n = match command {
            Command::Asymptotics if args.n.is_none() && n_range.is_none() => Some(DEFAULT_ASYMPTOTIC_N),
            Command::Count | Command::Zn | Command::Sample { .. } if args.n.is_none() && n_range.is_none() => {
                return Err(config_error(format!("{} needs --n or --n-range", command.name())));
            }
            Command::Ball { sweep: None, .. } if args.n.is_none() => {
                return Err(config_error("ball needs --n (or --sweep)"));
            }
            _ => args.n,
        };
        let sweep_end = match command {
            Command::Ball { sweep: Some(s), .. } => Some(NRange::parse(s)?.end),
            _ => None,
        };
        let largest = n.or(n_range.map(|r| r.end)).or(sweep_end).unwrap_or(0);
        let mode = match (command, args.mode) {
            (Command::Asymptotics, Some(ModeArg::Exact)) => {
                return Err(config_error("asymptotics runs in scaled mode only"));
            }
            (Command::Asymptotics, _) => Mode::Scaled,
            (_, Some(m)) => m.into(),
            (_, None) if largest <= 256 => Mode::Exact,
            _ => Mode::Scaled,
        };
        Ok(RunConfig {
            subcommand: command.name(),
            alpha,
            n,
            n_range,
            mode,
            seed: args.seed,
            stream: args.stream,
            cache: args.cache.as_ref().map(|p| p.display().to_string()),
            format: args.format,
            tol: args.tol,
            args: command_args(command),
        })
    }

    /// The sizes requested through `--n` (as `1..=N`) or `--n-range`.
    pub fn sizes(&self) -> Vec<usize> {
        match (self.n, self.n_range) {
            (_, Some(r)) => r.values(),
            (Some(n), None) => (1..=n).collect(),
            (None, None) => Vec::new(),
        }
    }

    pub fn integer_alpha(&self) -> Option<i32> {
        let a = self.alpha;
        (a.fract() == 0.0 && a.abs() <= 64.0).then_some(a as i32)
    }
}

fn command_args(command: &Command) -> serde_json::Value {
    match command {
        Command::Sample { count } => serde_json::json!({ "count": count }),
        Command::Ball {
            t0,
            sweep,
            method,
            draws,
        } => serde_json::json!({ "t0": t0, "sweep": sweep, "method": method, "draws": draws }),
        _ => serde_json::Value::Null,
    }
}

fn cache_path(dir: &Path, mode: Mode, n_max: usize) -> PathBuf {
    dir.join(format!("arborlab-count-{mode}-{n_max}.jsonl"))
}

/// Builds a count table, reusing a cached copy with the same (format, mode, N_max) key.
pub fn load_table(n_max: usize, mode: Mode, cache: Option<&str>) -> Result<CountTable, CliError> {
    let caps = TableCaps {
        exact: DEFAULT_EXACT_CAP,
        materialize: CLI_MATERIALIZE_CAP,
        ..TableCaps::default()
    };
    let Some(dir) = cache.map(Path::new) else {
        return Ok(CountTable::build_with_caps(n_max, mode, caps)?);
    };
    let path = cache_path(dir, mode, n_max);
    if let Ok(file) = File::open(&path) {
        if let Some(table) = read_cache(BufReader::new(file), mode, n_max)? {
            return Ok(table);
        }
    }
    let table = CountTable::build_with_caps(n_max, mode, caps)?;
    std::fs::create_dir_all(dir)?;
    write_cache(&table, BufWriter::new(File::create(&path)?))?;
    Ok(table)
}
