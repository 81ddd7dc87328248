//! Command-line front end for `focklab`.
//!
//! Exit codes: 0 success, 1 verification not met, 2 configuration error,
//! 3 numerical failure, 4 fit failure.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use focklab::potentials::{
    canonical_decompose, detect_k, HomogeneousHermitianPoly, MacroscopicPotential, MicroscopicPotential, PotentialConfig,
};

pub mod commands;
pub mod svg;
pub mod table;

pub use commands::*;
pub use table::Table;

pub const EXIT_UNVERIFIED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_FIT: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn io(e: csv::Error) -> Self {
        Self::config(e.to_string())
    }

    /// Errors raised while building inputs are configuration errors.
    pub fn from_setup(e: focklab::Error) -> Self {
        Self::config(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<focklab::Error> for CliError {
    fn from(e: focklab::Error) -> Self {
        use focklab::Error as E;
        let code = match e {
            E::Config(_) | E::InvalidParameter(_) | E::Domain(_) | E::Divergent(_) => EXIT_CONFIG,
            E::Fit(_) => EXIT_FIT,
            _ => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(e.to_string())
    }
}

/// `START:END:POINTS[:log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn linear(start: f64, end: f64, points: usize) -> Self {
        Self {
            start,
            end,
            points,
            log: false,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let m = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / m;
                if self.log {
                    (self.start.ln() + t * (self.end.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.end - self.start)
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("grid {s:?} must be START:END:POINTS[:log|linear]"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("grid {s:?}: {t:?}: {e}"));
        let start = num(parts[0])?;
        let end = num(parts[1])?;
        let points: usize = parts[2].trim().parse().map_err(|e| format!("grid {s:?}: {e}"))?;
        let log = match parts.get(3).map(|t| t.trim()) {
            None | Some("linear") => false,
            Some("log") => true,
            Some(other) => return Err(format!("grid spacing {other:?} is not log or linear")),
        };
        if points == 0 {
            return Err("grid needs at least one point".into());
        }
        if !(start.is_finite() && end.is_finite()) || (points > 1 && !(end > start)) {
            return Err(format!("grid {s:?} needs finite START < END"));
        }
        if log && !(start > 0.0) {
            return Err("log grid needs START > 0".into());
        }
        Ok(Self { start, end, points, log })
    }
}

/// Potential given inline (`Q_0 = amplitude |z|^{2k}`) or from a TOML file.
#[derive(Debug, Clone, Default, Args)]
pub struct PotentialArgs {
    #[arg(long, conflicts_with = "coeffs_file")]
    pub k: Option<u32>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "coeffs_file")]
    pub c: Option<f64>,
    #[arg(long, conflicts_with = "coeffs_file")]
    pub amplitude: Option<f64>,
    /// TOML potential description
    #[arg(long)]
    pub coeffs_file: Option<PathBuf>,
}

impl PotentialArgs {
    pub fn inline(k: u32, c: f64, amplitude: f64) -> Self {
        Self {
            k: Some(k),
            c: Some(c),
            amplitude: Some(amplitude),
            coeffs_file: None,
        }
    }

    pub fn file(path: &Path) -> Self {
        Self {
            coeffs_file: Some(path.to_path_buf()),
            ..Self::default()
        }
    }

    fn inline_values(&self) -> Result<(u32, f64, f64), CliError> {
        let k = self.k.unwrap_or(1);
        let c = self.c.unwrap_or(0.0);
        let a = self.amplitude.unwrap_or(1.0);
        if k == 0 {
            return Err(CliError::config("--k must be at least 1"));
        }
        if !(a > 0.0 && a.is_finite()) {
            return Err(CliError::config(format!("--amplitude must be positive, got {a}")));
        }
        Ok((k, c, a))
    }

    /// The macroscopic potential `Q` (inline: `amplitude r^{2k}`).
    pub fn macroscopic(&self) -> Result<MacroscopicPotential, CliError> {
        match &self.coeffs_file {
            Some(path) => PotentialConfig::from_path(path)
                .and_then(|cfg| cfg.to_potential())
                .map_err(CliError::from_setup),
            None => {
                let (k, c, a) = self.inline_values()?;
                let mut coeffs = vec![0.0; k as usize];
                coeffs[k as usize - 1] = a;
                MacroscopicPotential::radial(coeffs, c).map_err(CliError::from_setup)
            }
        }
    }

    /// The microscopic potential `Q_0 - 2c log|z|`. A homogeneous file is
    /// taken as `Q_0` itself, pure terms included; otherwise `Q_0` is the
    /// homogeneous part of the canonical decomposition.
    pub fn microscopic(&self) -> Result<MicroscopicPotential, CliError> {
        match &self.coeffs_file {
            Some(_) => {
                let q = self.macroscopic()?;
                let taylor = q.taylor();
                let top = taylor.max_degree();
                if q.spectators().is_empty() && taylor.terms().all(|(i, j, _)| i + j == top) {
                    return HomogeneousHermitianPoly::new(top, taylor)
                        .and_then(|q0| MicroscopicPotential::new(q0, q.c()))
                        .map_err(CliError::from_setup);
                }
                let k = detect_k(&q).map_err(CliError::from_setup)?;
                canonical_decompose(&q, k)
                    .and_then(|d| d.microscopic(q.c()))
                    .map_err(CliError::from_setup)
            }
            None => {
                let (k, c, a) = self.inline_values()?;
                MicroscopicPotential::radial(k, c, a).map_err(CliError::from_setup)
            }
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file; a JSON sidecar goes next to it. Without it CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct R0Args {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value = "0:5:101")]
    pub grid: GridSpec,
    /// Angles per radius for non-radial potentials
    #[arg(long, default_value_t = 16)]
    pub angles: usize,
    /// Polynomial truncation for non-radial potentials
    #[arg(long, default_value_t = focklab::general_bergman::DEFAULT_TRUNCATION)]
    pub truncation: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Thm1Args {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Radii; defaults to a r^{2k} = 1, 1.25, ..., 16
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RescaleArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value = "0:3:61")]
    pub grid: GridSpec,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, conflicts_with = "n_list")]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 2_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 0.3)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1_000)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 30)]
    pub bins: usize,
    /// Outer histogram radius; defaults to 1.5 times the droplet radius
    #[arg(long)]
    pub r_max: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct Fig1Args {
    /// SVG path; the data table is written next to it as CSV
    #[arg(long, default_value = "fig1.svg")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 301)]
    pub points: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value_t = focklab::general_bergman::DEFAULT_TRUNCATION)]
    pub truncation: usize,
    #[arg(long, default_value_t = focklab::general_bergman::DEFAULT_ANGULAR_POINTS)]
    pub angular_points: usize,
    #[arg(long, default_value = "0:2:41")]
    pub grid: GridSpec,
    #[arg(long, default_value_t = 16)]
    pub angles: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Tabulate the Bergman function R0 against the Laplacian of Q0
    R0(R0Args),
    /// Fit the exponential approach of R0 to the Laplacian of Q0
    VerifyThm1(Thm1Args),
    /// Rescaled finite-n intensities against R0
    Rescale(RescaleArgs),
    /// Droplet radius, modulus and microscopic scales
    Equilibrium(EquilibriumArgs),
    /// Metropolis sampling of the Coulomb gas
    Sample(SampleArgs),
    /// Three Bergman function curves as SVG, with the data table as CSV
    Fig1(Fig1Args),
    /// Truncated Bergman kernel of a non-radial Q0 from its moment matrix
    Gram(GramArgs),
}

#[derive(Debug, Clone, Parser)]
#[command(name = "focklab", version, about = "Bergman functions, micro-densities and Coulomb gas intensities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::R0(a) => cmd_r0(a).map(|_| 0),
        Command::VerifyThm1(a) => cmd_verify_thm1(a).map(|r| if r.pass { 0 } else { EXIT_UNVERIFIED }),
        Command::Rescale(a) => cmd_rescale(a).map(|_| 0),
        Command::Equilibrium(a) => cmd_equilibrium(a).map(|_| 0),
        Command::Sample(a) => cmd_sample(a).map(|_| 0),
        Command::Fig1(a) => cmd_fig1(a).map(|_| 0),
        Command::Gram(a) => cmd_gram(a).map(|_| 0),
    }
}
