//! Configuration, presets and file output for the `reconstruct` experiment runner.

pub mod config;
pub mod descriptor;
pub mod error;
pub mod presets;
pub mod runner;

pub use config::{load, ExperimentConfig, LoadedConfig, Mode};
pub use error::{CliError, Result};
pub use presets::Preset;
pub use runner::{execute, Status};
