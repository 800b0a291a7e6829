//! TOML run configuration. Keys mirror the long flag names; flags override
//! the file, which overrides built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::model_file::{BasisName, ModeName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Efrm,
    Flm,
    Paflm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GradientName {
    /// Forward finite differences.
    Fd,
    /// Analytic gradient with the inner warpings held fixed.
    Envelope,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigFile {
    pub data: Option<PathBuf>,
    pub responses: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub basis: Option<BasisName>,
    #[serde(rename = "J")]
    pub j: Option<usize>,
    pub h_degree: Option<usize>,
    pub mode: Option<ModeName>,
    pub method: Option<MethodName>,
    pub gradient: Option<GradientName>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub a_grid: Option<Vec<f64>>,
    pub runs: Option<usize>,
    pub grid_size: Option<usize>,
    pub n_samples: Option<usize>,
    pub sim: Option<u8>,
    pub warp_amplitude: Option<f64>,
    pub noise_sd: Option<f64>,
    pub models: Option<Vec<String>>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(path, &text)
    }

    pub fn parse(path: &Path, text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start].matches('\n').count() as u64 + 1);
            CliError::parse(path, line, e.message().to_string())
        })
    }
}
