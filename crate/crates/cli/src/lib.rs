//! Library side of the `mirrorcorr` command-line tool.

pub mod error;
pub mod fit;
pub mod plot;
pub mod sweep;
pub mod table;

use mirror_corr::{ModelConfig, Units};
use std::path::Path;

pub use error::{CliError, CliResult};

/// Model used when no `--config` is given.
pub fn default_model_config() -> ModelConfig {
    ModelConfig {
        units: Units::Natural,
        m: 1.0,
        omega0: 1.0,
        l0: 50.0,
        n_modes: 512,
        uv_cutoff: Some(20.0),
        lambda: 1.0,
    }
}

/// Reads a JSON model configuration; unreadable files are I/O errors,
/// unknown or missing keys are configuration errors.
pub fn load_model_config(path: &Path) -> CliResult<ModelConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(ModelConfig::from_json(&text)?)
}
