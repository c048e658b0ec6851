//! Artifact writing with content hashing.
//!
//! Every file a command emits goes through [`ArtifactStore`], which records
//! the relative path and SHA-256 of the exact bytes written. The records
//! feed the run manifest, so a manifest entry always matches the file on
//! disk byte for byte.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use slowtime::{Error, Result};

use crate::manifest::FileRecord;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Hash an input file as it is on disk.
pub fn hash_input(path: &Path) -> Result<FileRecord> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(FileRecord {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

pub struct ArtifactStore {
    dir: PathBuf,
    records: Vec<FileRecord>,
}

impl ArtifactStore {
    /// Create the output directory (and parents) if needed.
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        Ok(ArtifactStore {
            dir: dir.to_path_buf(),
            records: Vec::new(),
        })
    }

    /// Write bytes under a relative name and record their hash. Forward
    /// slashes in the name introduce subdirectories.
    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::Io {
                path: parent.display().to_string(),
                source: e,
            })?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        self.records.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Validation(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn records(&self) -> &[FileRecord] {
        &self.records
    }
}

/// Best-effort diagnostic dump for failed runs; never masks the original
/// error.
pub fn write_diagnostic(dir: &Path, class: &str, err: &Error) {
    if std::fs::create_dir_all(dir).is_err() {
        return;
    }
    let body = serde_json::json!({
        "class": class,
        "error": err.to_string(),
    });
    let text = format!("{body:#}\n");
    let _ = std::fs::write(dir.join("error.json"), text);
}
