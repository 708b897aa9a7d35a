//! JSON-lines draw files, one per chain.
//!
//! Line 1 is a header object: format tag, version, chain, seed, config hash,
//! the full sampler config, panel dimensions, unit ids and period labels.
//! Each further line is one stored draw with fields `iteration`, `g` and `d`
//! (unit-major `N × T`), `p`, `log_joint` and `params` (occupied clusters
//! only). New draws can be appended without rewriting the file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::{Draw, PosteriorDraws, SamplerConfig};

pub const DRAWS_FORMAT: &str = "stickydp-draws";
pub const DRAWS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawFileHeader {
    pub format: String,
    pub version: u32,
    pub chain: usize,
    pub seed: u64,
    pub config_hash: String,
    pub config: SamplerConfig,
    pub n_units: usize,
    pub n_periods: usize,
    pub unit_ids: Vec<String>,
    pub periods: Vec<i64>,
}

pub fn write_draws(header: &DrawFileHeader, draws: &PosteriorDraws) -> Result<String> {
    if header.n_units != draws.n_units || header.n_periods != draws.n_periods {
        return Err(Error::DimensionMismatch("draw file header does not match the draws".into()));
    }
    let mut out = serde_json::to_string(header)?;
    out.push('\n');
    for d in &draws.draws {
        out.push_str(&serde_json::to_string(d)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses a draw file; `path` only labels error messages. A file without
/// any draw line is an error.
pub fn read_draws(text: &str, path: &str) -> Result<(DrawFileHeader, PosteriorDraws)> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| err(1, "empty draw file".into()))?;
    let header: DrawFileHeader = serde_json::from_str(first).map_err(|e| err(1, format!("bad header: {e}")))?;
    if header.format != DRAWS_FORMAT || header.version != DRAWS_VERSION {
        return Err(err(
            1,
            format!(
                "unsupported draw format `{}` version {} (this build reads {DRAWS_FORMAT} version {DRAWS_VERSION})",
                header.format, header.version
            ),
        ));
    }
    let mut draws = Vec::new();
    for (idx, line) in lines {
        let d: Draw = serde_json::from_str(line).map_err(|e| err(idx + 1, e.to_string()))?;
        if d.g.len() != header.n_units * header.n_periods || d.d.len() != d.g.len() {
            return Err(err(idx + 1, format!("draw does not cover {}×{} cells", header.n_units, header.n_periods)));
        }
        draws.push(d);
    }
    if draws.is_empty() {
        return Err(err(1, "draw file holds no draws".into()));
    }
    let posterior = PosteriorDraws::new(header.n_units, header.n_periods, draws)?;
    Ok((header, posterior))
}

pub fn read_draws_file(path: &Path) -> Result<(DrawFileHeader, PosteriorDraws)> {
    read_draws(&super::read_text(path)?, &path.display().to_string())
}
