//! Run configuration: a flat TOML file merged with command-line flags.
//!
//! Precedence is flag, then file, then built-in default. Defaults describe the
//! C = 4 two-atom reference system (γ_L = 1, ξ = 0, g = 20, κ_wg = 100,
//! κ_sc = 300).

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use chiralcav::carving::DipSide;
use chiralcav::spectrum::figures::{FIG2_GAMMA_L_POINTS, FIG2_XI_POINTS, G_C4, KAPPA_SC, KAPPA_WG};
use chiralcav::spectrum::{DEFAULT_PROMINENCE, DIP_GRID_POINTS, DIP_WINDOW};
use chiralcav::SystemParams;
use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::output::DEFAULT_PRECISION;
use crate::CliError;

/// Names the directory that relative output paths are resolved against.
pub const OUTPUT_DIR_ENV: &str = "CHIRALCAV_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl From<Side> for DipSide {
    fn from(side: Side) -> Self {
        match side {
            Side::Positive => DipSide::Positive,
            Side::Negative => DipSide::Negative,
        }
    }
}

/// A phase in radians, written either as a number or as a multiple of π
/// such as `pi/2`, `3pi/8` or `-0.5*pi`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "PhaseRepr")]
pub struct Phase(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum PhaseRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<PhaseRepr> for Phase {
    type Error = String;

    fn try_from(repr: PhaseRepr) -> Result<Self, String> {
        match repr {
            PhaseRepr::Number(x) => Ok(Phase(x)),
            PhaseRepr::Text(s) => parse_phase(&s),
        }
    }
}

pub fn parse_phase(s: &str) -> Result<Phase, String> {
    let text = s.trim().to_lowercase().replace('π', "pi").replace(' ', "");
    if let Ok(x) = text.parse::<f64>() {
        return Ok(Phase(x));
    }
    let bad = || format!("invalid phase '{s}': expected a number or a multiple of pi such as 3pi/8");
    let (before, after) = text.split_once("pi").ok_or_else(bad)?;
    let coefficient = match before.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let divisor = match after {
        "" => 1.0,
        d => d.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(bad)?,
    };
    if divisor == 0.0 {
        return Err(bad());
    }
    Ok(Phase(coefficient * PI / divisor))
}

/// Keys accepted in a config file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    pub gamma_l: Option<f64>,
    pub gamma_r: Option<f64>,
    pub g: Option<f64>,
    pub kappa_wg: Option<f64>,
    pub kappa_sc: Option<f64>,
    pub xi: Option<Phase>,
    pub gamma_mhz: Option<f64>,

    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub points: Option<usize>,
    pub prominence: Option<f64>,
    pub xi_min: Option<Phase>,
    pub xi_max: Option<Phase>,
    pub xi_points: Option<usize>,
    pub gamma_l_min: Option<f64>,
    pub gamma_l_max: Option<f64>,
    pub gamma_l_points: Option<usize>,

    pub m: Option<usize>,
    pub reps: Option<usize>,
    pub dip_side: Option<Side>,
    pub plan: Option<Vec<f64>>,

    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub precision: Option<usize>,
}

impl FileConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.to_path_buf(), e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

fn phase_arg(s: &str) -> Result<Phase, String> {
    parse_phase(s)
}

/// Flags shared by every command that builds a system.
#[derive(Debug, Clone, Default, Args)]
pub struct SystemFlags {
    /// Flat TOML file of default values; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of atoms.
    #[arg(long)]
    pub n: Option<usize>,
    /// Left-directional decay rate γ_L/γ; γ_R defaults to 1 − γ_L.
    #[arg(long)]
    pub gamma_l: Option<f64>,
    /// Right-directional decay rate γ_R/γ.
    #[arg(long)]
    pub gamma_r: Option<f64>,
    /// Atom–cavity coupling g/γ.
    #[arg(long)]
    pub g: Option<f64>,
    /// Cavity decay into the waveguide, κ_wg/γ.
    #[arg(long)]
    pub kappa_wg: Option<f64>,
    /// Cavity scattering loss, κ_sc/γ.
    #[arg(long)]
    pub kappa_sc: Option<f64>,
    /// Propagation phase between neighbouring atoms, e.g. 0, pi/2, 3pi/8.
    #[arg(long, value_parser = phase_arg)]
    pub xi: Option<Phase>,
    /// γ in MHz, recorded as display metadata only.
    #[arg(long)]
    pub gamma_mhz: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputFlags {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Significant digits of numeric output.
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepFlags {
    #[arg(long)]
    pub delta_min: Option<f64>,
    #[arg(long)]
    pub delta_max: Option<f64>,
    /// Number of detuning grid points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Minimum prominence of reported dips and peaks.
    #[arg(long)]
    pub prominence: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MapFlags {
    #[arg(long, value_parser = phase_arg)]
    pub xi_min: Option<Phase>,
    #[arg(long, value_parser = phase_arg)]
    pub xi_max: Option<Phase>,
    #[arg(long)]
    pub xi_points: Option<usize>,
    #[arg(long)]
    pub gamma_l_min: Option<f64>,
    #[arg(long)]
    pub gamma_l_max: Option<f64>,
    #[arg(long)]
    pub gamma_l_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolFlags {
    /// Number of qubits in the register.
    #[arg(long)]
    pub m: Option<usize>,
    /// Measurements per plan step.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Side of resonance for dip steps.
    #[arg(long, value_enum)]
    pub dip_side: Option<Side>,
    /// Explicit probe detunings, comma separated, replacing the planner.
    #[arg(long, value_delimiter = ',')]
    pub plan: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
    pub prominence: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_points: usize,
    pub gamma_l_min: f64,
    pub gamma_l_max: f64,
    pub gamma_l_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub m: usize,
    pub reps: usize,
    pub dip_side: DipSide,
    pub plan: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
    pub precision: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemParams,
    pub sweep: SweepSpec,
    pub protocol: ProtocolSpec,
    pub output: OutputSpec,
}

/// All flags of one invocation, absent groups left at their defaults.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub system: SystemFlags,
    pub sweep: SweepFlags,
    pub map: MapFlags,
    pub protocol: ProtocolFlags,
    pub output: OutputFlags,
}

impl RunConfig {
    /// Reads the config file named by `--config`, if any, and merges.
    pub fn from_flags(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.system.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve(&file, flags)
    }

    pub fn resolve(file: &FileConfig, flags: &Flags) -> Result<Self, CliError> {
        let s = &flags.system;
        let gamma_l = s.gamma_l.or(file.gamma_l);
        let gamma_r = s.gamma_r.or(file.gamma_r);
        let mut system = SystemParams::new(
            s.n.or(file.n).unwrap_or(2),
            1.0,
            s.g.or(file.g).unwrap_or(G_C4),
            s.kappa_wg.or(file.kappa_wg).unwrap_or(KAPPA_WG),
            s.kappa_sc.or(file.kappa_sc).unwrap_or(KAPPA_SC),
            s.xi.or(file.xi).map_or(0.0, |p| p.0),
        )
        .with_gamma_mhz(s.gamma_mhz.or(file.gamma_mhz));
        system = match (gamma_l, gamma_r) {
            (Some(l), Some(r)) => system.with_decay_rates(l, r),
            (Some(l), None) => system.with_gamma_l(l),
            (None, Some(r)) => system.with_decay_rates(1.0 - r, r),
            (None, None) => system,
        };

        let (sw, mp) = (&flags.sweep, &flags.map);
        let sweep = SweepSpec {
            delta_min: sw.delta_min.or(file.delta_min).unwrap_or(DIP_WINDOW.0),
            delta_max: sw.delta_max.or(file.delta_max).unwrap_or(DIP_WINDOW.1),
            points: sw.points.or(file.points).unwrap_or(DIP_GRID_POINTS),
            prominence: sw.prominence.or(file.prominence).unwrap_or(DEFAULT_PROMINENCE),
            xi_min: mp.xi_min.or(file.xi_min).map_or(0.0, |p| p.0),
            xi_max: mp.xi_max.or(file.xi_max).map_or(TAU, |p| p.0),
            xi_points: mp.xi_points.or(file.xi_points).unwrap_or(FIG2_XI_POINTS),
            gamma_l_min: mp.gamma_l_min.or(file.gamma_l_min).unwrap_or(0.0),
            gamma_l_max: mp.gamma_l_max.or(file.gamma_l_max).unwrap_or(1.0),
            gamma_l_points: mp.gamma_l_points.or(file.gamma_l_points).unwrap_or(FIG2_GAMMA_L_POINTS),
        };

        let p = &flags.protocol;
        let protocol = ProtocolSpec {
            m: p.m.or(file.m).unwrap_or(2),
            reps: p.reps.or(file.reps).unwrap_or(1),
            dip_side: p.dip_side.or(file.dip_side).map_or(DipSide::Positive, DipSide::from),
            plan: p.plan.clone().or_else(|| file.plan.clone()),
        };

        let o = &flags.output;
        let precision = o.precision.or(file.precision).unwrap_or(DEFAULT_PRECISION);
        if !(1..=17).contains(&precision) {
            return Err(CliError::Usage(format!("precision must be between 1 and 17, got {precision}")));
        }
        let output = OutputSpec {
            path: o.output.clone().or_else(|| file.output.clone()),
            format: o.format.or(file.format).unwrap_or_default(),
            precision,
        };
        Ok(RunConfig {
            system,
            sweep,
            protocol,
            output,
        })
    }
}

/// Joins a relative path onto the directory named by [`OUTPUT_DIR_ENV`].
pub fn resolve_output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}
