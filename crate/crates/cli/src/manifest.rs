//! Batch manifests: one `<tile_id> <run.toml>` pair per line.
//!
//! Blank lines and `#` comments are skipped. Config paths are relative to
//! the manifest's directory.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TileStatus {
    Pending,
    Done,
    Failed(String),
}

impl fmt::Display for TileStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TileStatus::Pending => f.write_str("pending"),
            TileStatus::Done => f.write_str("done"),
            TileStatus::Failed(_) => f.write_str("failed"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TileJob {
    pub id: String,
    pub config: PathBuf,
    pub status: TileStatus,
}

pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<TileJob>, CliError> {
    let mut jobs = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(id), Some(path), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(CliError::input(format!(
                "manifest line {lineno}: expected `<tile_id> <config path>`"
            )));
        };
        if let Some(first) = seen.insert(id.to_string(), lineno) {
            return Err(CliError::input(format!(
                "manifest line {lineno}: tile id {id:?} already used on line {first}"
            )));
        }
        let config = PathBuf::from(path);
        jobs.push(TileJob {
            id: id.to_string(),
            config: if config.is_relative() { base.join(config) } else { config },
            status: TileStatus::Pending,
        });
    }
    if jobs.is_empty() {
        return Err(CliError::input("manifest lists no tiles"));
    }
    Ok(jobs)
}

pub fn read_manifest(path: &Path) -> Result<Vec<TileJob>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new("")))
}
