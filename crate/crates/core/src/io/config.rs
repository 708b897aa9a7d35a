//! TOML run configuration.
//!
//! ```toml
//! [sampler]
//! truncation = 10
//! n_iterations = 4000
//! burn_in = 1000
//! seed = 7
//!
//! [sampler.channel_priors.bills]
//! kind = "poisson"
//! shape = 1.0
//! rate = 1.0
//!
//! [output]
//! dir = "runs/sim1"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sampler: SamplerConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Parses and validates; `path` only labels error messages.
    pub fn from_toml(text: &str, path: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse {
                path: path.to_string(),
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.sampler.validate().map_err(|e| Error::Format {
            path: path.to_string(),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        RunConfig::from_toml(&super::read_text(path)?, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configs serialize to TOML")
    }
}

/// SHA-256 of the sampler settings in canonical JSON form.
pub fn config_hash(config: &SamplerConfig) -> String {
    let json = serde_json::to_string(config).expect("sampler configs serialize to JSON");
    super::sha256_hex(json.as_bytes())
}
