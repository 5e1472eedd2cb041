//! Command-line front end for the `chiralcav` simulator.
//!
//! | command    | output                                                  |
//! |------------|---------------------------------------------------------|
//! | `spectrum` | `delta_over_gamma,R` rows and a feature block           |
//! | `map`      | `xi,gamma_L,R` rows of the on-resonance map             |
//! | `carve`    | per-measurement protocol trace and the final state      |
//! | `repro`    | one file per curve of a standard figure                 |
//! | `validate` | parameter report                                        |
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 carving protocol
//! extinguished, 4 numerical failure, 1 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

use config::{Flags, MapFlags, OutputFlags, ProtocolFlags, SweepFlags, SystemFlags};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXTINGUISHED: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] chiralcav::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_extinguished() => EXIT_EXTINGUISHED,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chiralcav", version, about = "Reflectivity spectra and state carving for atoms chirally coupled to a cavity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflectivity R(δ) over a detuning grid, with dips and peaks.
    #[command(allow_negative_numbers = true)]
    Spectrum(SpectrumArgs),
    /// On-resonance reflectivity over a (ξ, γ_L) grid.
    #[command(allow_negative_numbers = true)]
    Map(MapArgs),
    /// Heralded carving of a Bell (M = 2) or W (M ≥ 3) state.
    #[command(allow_negative_numbers = true)]
    Carve(CarveArgs),
    /// Regenerates the data behind a standard figure: fig2, fig3, fig3_2, fig4.
    Repro(ReproArgs),
    /// Checks parameters and prints derived quantities.
    #[command(allow_negative_numbers = true)]
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[command(flatten)]
    pub sweep: SweepFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[command(flatten)]
    pub map: MapFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Args)]
pub struct CarveArgs {
    #[command(flatten)]
    pub system: SystemFlags,
    #[command(flatten)]
    pub protocol: ProtocolFlags,
    #[command(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Figure id.
    pub figure: String,
    /// Destination directory; defaults to $CHIRALCAV_OUTPUT_DIR, then `repro`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<config::Format>,
    /// Significant digits of numeric output.
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub system: SystemFlags,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Data goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Spectrum(a) => {
            let flags = Flags {
                system: a.system,
                sweep: a.sweep,
                output: a.output,
                ..Flags::default()
            };
            commands::cmd_spectrum(&config::RunConfig::from_flags(&flags)?, out)
        }
        Command::Map(a) => {
            let flags = Flags {
                system: a.system,
                map: a.map,
                output: a.output,
                ..Flags::default()
            };
            commands::cmd_map(&config::RunConfig::from_flags(&flags)?, out)
        }
        Command::Carve(a) => {
            let flags = Flags {
                system: a.system,
                protocol: a.protocol,
                output: a.output,
                ..Flags::default()
            };
            commands::cmd_carve(&config::RunConfig::from_flags(&flags)?, out)
        }
        Command::Repro(a) => {
            let flags = Flags {
                output: OutputFlags {
                    output: None,
                    format: a.format,
                    precision: a.precision,
                },
                ..Flags::default()
            };
            let cfg = config::RunConfig::from_flags(&flags)?;
            let dir = a.out_dir.unwrap_or_else(commands::default_repro_dir);
            commands::cmd_repro(&a.figure, &dir, &cfg.output, out)
        }
        Command::Validate(a) => {
            let flags = Flags {
                system: a.system,
                ..Flags::default()
            };
            commands::cmd_validate(&config::RunConfig::from_flags(&flags)?, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_follow_error_class() {
        use chiralcav::Error;
        assert_eq!(CliError::Usage("x".into()).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::Core(Error::Pole("p")).exit_code(), EXIT_NUMERICAL);
        assert_eq!(
            CliError::Core(Error::ProtocolExtinguished {
                probability: 0.0,
                measurement: 1
            })
            .exit_code(),
            EXIT_EXTINGUISHED
        );
        assert_eq!(CliError::Core(Error::UnknownFigure("fig9".into())).exit_code(), EXIT_USAGE);
    }
}
