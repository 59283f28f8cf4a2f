//! `cpl`: closed-form RNT reports, inverse mean curvature flow runs,
//! certificate verification of graphical initial data, and parameter sweeps.
//!
//! Exit codes: 0 success, 2 input error, 3 flow breakdown, 4 energy
//! condition violated by the input data.

mod commands;

pub use commands::{imcf_run, rnt_report, sweep, verify};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cpl_core::surface::GridMode;
use std::fmt;
use std::path::{Path, PathBuf};

/// Environment variable overriding the default grid resolution.
pub const RESOLUTION_ENV: &str = "CPL_DEFAULT_RES";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Ok = 0,
    Input = 2,
    Breakdown = 3,
    EnergyGate = 4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { status: ExitStatus::Input, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cpl_core::Error> for CliError {
    fn from(e: cpl_core::Error) -> Self {
        let status = match e {
            cpl_core::Error::FlowBreakdown { .. } => ExitStatus::Breakdown,
            _ => ExitStatus::Input,
        };
        Self { status, message: e.to_string() }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "cpl", version, about = "Charged Penrose inequality toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form report for one RNT slice.
    RntReport(RntReportArgs),
    /// Run inverse mean curvature flow from a star-shaped surface.
    ImcfRun(ImcfRunArgs),
    /// Mass breakdown and certificates for graphical initial data.
    Verify(VerifyArgs),
    /// Closed-form certificate slacks over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct RntReportArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub q: f64,
    /// Number of radial samples between r_+ and 10 r_+.
    #[arg(long, default_value_t = 16)]
    pub samples: usize,
    /// Output path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sphere,
    Spheroid,
    Ellipsoid,
    RandomConvex,
    RandomStar,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridArg {
    Axisymmetric,
    Full,
}

impl From<GridArg> for GridMode {
    fn from(g: GridArg) -> Self {
        match g {
            GridArg::Axisymmetric => GridMode::Axisymmetric,
            GridArg::Full => GridMode::Full,
        }
    }
}

#[derive(Debug, Args)]
pub struct ImcfRunArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Shape::Sphere)]
    pub shape: Shape,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Spheroid semi-axis orthogonal to the symmetry axis.
    #[arg(long, default_value_t = 1.0)]
    pub equatorial: f64,
    /// Spheroid semi-axis along the symmetry axis.
    #[arg(long, default_value_t = 1.0)]
    pub polar: f64,
    /// Comma-separated ellipsoid semi-axes, one per dimension.
    #[arg(long, value_delimiter = ',')]
    pub axes: Vec<f64>,
    /// Surface table for `--shape file`.
    #[arg(long)]
    pub surface: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = GridArg::Axisymmetric)]
    pub grid: GridArg,
    /// Polar resolution (nodes, or rows on a full grid).
    #[arg(long)]
    pub res: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// Charge of the Coulomb field fed to the flux chain.
    #[arg(long, default_value_t = 1.0)]
    pub charge: f64,
    /// CSV time series path; stdout if omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON summary path; stderr if omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// TOML data definition.
    #[arg(long)]
    pub data: PathBuf,
    /// Optional horizon surface table; defaults to the round sphere r = r_start.
    #[arg(long)]
    pub horizon: Option<PathBuf>,
    #[arg(long)]
    pub res: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub m: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub q: Vec<f64>,
    /// Worker threads; rows keep the input order regardless.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Resolution from the flag, else `CPL_DEFAULT_RES`, else `None`.
pub fn resolution(flag: Option<usize>) -> CliResult<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(RESOLUTION_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| CliError::input(format!("{RESOLUTION_ENV} = `{v}` is not a positive integer"))),
        Err(_) => Ok(None),
    }
}

/// Writes `content` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Fixed 17-significant-digit rendering used in every CSV.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::RntReport(a) => rnt_report(&a),
        Command::ImcfRun(a) => imcf_run(&a),
        Command::Verify(a) => verify(&a),
        Command::Sweep(a) => sweep(&a),
    }
}
