//! File formats and staged output writing.
//!
//! Every format is line-oriented text. Outputs of one command are staged in
//! memory and only written once all of them have been produced, each through
//! a temporary file renamed into place, so a failed command leaves no
//! partial files behind.

mod config;
mod draws;
mod legislative;
mod panel;
mod summary;

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::{config_hash, OutputConfig, RunConfig};
pub use draws::{read_draws, read_draws_file, write_draws, DrawFileHeader, DRAWS_FORMAT, DRAWS_VERSION};
pub use legislative::{
    ingest_legislative, ingest_legislative_files, parse_legislative_records, read_region_table, LegislativeChannel, LegislativeRecord,
    LegislativeSchema, write_legislative_records,
};
pub use panel::{read_panel, read_panel_file, write_panel, PANEL_FORMAT, PANEL_VERSION};
pub use summary::{change_matrix_tsv, cocluster_matrix_tsv, series_tsv, Provenance};

/// Hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Files produced by one command, written together by [`OutputBatch::commit`].
#[derive(Debug, Default)]
pub struct OutputBatch {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputBatch {
    pub fn new() -> Self {
        OutputBatch::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes every file to a temporary sibling, then renames them all into
    /// place. On failure, temporaries are removed.
    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut staged: Vec<(PathBuf, PathBuf)> = Vec::with_capacity(self.files.len());
        let result = (|| {
            for (path, contents) in &self.files {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                }
                let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
                let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
                fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
                staged.push((tmp, path.clone()));
            }
            for (tmp, path) in &staged {
                fs::rename(tmp, path).map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        })();
        if let Err(e) = result {
            for (tmp, _) in &staged {
                let _ = fs::remove_file(tmp);
            }
            return Err(e);
        }
        Ok(self.files.into_iter().map(|(p, _)| p).collect())
    }
}
