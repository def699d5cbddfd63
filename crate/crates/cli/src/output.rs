//! Atomic artifact writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Writes `contents` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `kernel.csv` -> `kernel.csv.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// The main artifact plus a sidecar holding the resolved config and a summary.
pub fn write_with_sidecar(
    path: &Path,
    contents: &[u8],
    config: &serde_json::Value,
    summary: serde_json::Value,
) -> Result<(), CliError> {
    let sidecar = serde_json::json!({
        "artifact": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_atomic(path, contents)?;
    write_atomic(&sidecar_path(path), text.as_bytes())
}
