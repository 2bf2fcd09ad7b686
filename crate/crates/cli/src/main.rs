use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wavecoeff_cli::{execute, load, CliError, Mode, Preset, Status};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Sweep,
    Geometry,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PresetArg {
    Table1a,
    Table1b,
    Table1c,
    Table2,
}

/// Reconstruct the coefficient p(x) of a 1D wave equation from noisy interior observations.
#[derive(Debug, Parser)]
#[command(name = "reconstruct", version)]
struct Args {
    /// TOML experiment config; merged over --preset when both are given.
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Noise seed, applied to the observation block and every sweep case.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main_inner(args: Args) -> Result<Status, CliError> {
    let preset = args.preset.map(|p| match p {
        PresetArg::Table1a => Preset::Table1a,
        PresetArg::Table1b => Preset::Table1b,
        PresetArg::Table1c => Preset::Table1c,
        PresetArg::Table2 => Preset::Table2,
    });
    let text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?,
        ),
        None => None,
    };
    let mut loaded = load(preset, text.as_deref())?;
    let c = &mut loaded.config;
    if let Some(m) = args.mode {
        c.mode = match m {
            ModeArg::Single => Mode::Single,
            ModeArg::Sweep => Mode::Sweep,
            ModeArg::Geometry => Mode::Geometry,
        };
    }
    if let Some(seed) = args.seed {
        c.observation.seed = seed;
        c.cases.iter_mut().for_each(|case| case.seed = Some(seed));
    }
    if let Some(out) = args.out {
        c.output.dir = out;
    }
    execute(&loaded)
}

fn main() -> ExitCode {
    match main_inner(Args::parse()) {
        Ok(status) => {
            if status == Status::NotConverged {
                eprintln!("reconstruct: not every run converged");
            }
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("reconstruct: {e}");
            ExitCode::from(1)
        }
    }
}
