//! The run manifest: what ran, with which inputs, emitting which files.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use slowtime::Result;

use crate::store::ArtifactStore;

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Audit record written at the end of every successful command.
///
/// `config` is the effective configuration after parsing, not the raw
/// input text, so defaulted fields appear with their resolved values.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub inputs: Vec<FileRecord>,
    pub artifacts: Vec<FileRecord>,
}

pub fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// The full invocation as the shell delivered it.
pub fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

/// Snapshot artifact records and write `manifest.json` as the final file.
pub fn finish(
    store: &mut ArtifactStore,
    config: serde_json::Value,
    seeds: Vec<u64>,
    started_unix: u64,
    inputs: Vec<FileRecord>,
) -> Result<()> {
    let manifest = RunManifest {
        command: command_line(),
        config,
        seeds,
        started_unix,
        finished_unix: now_unix(),
        inputs,
        artifacts: store.records().to_vec(),
    };
    store.write_json("manifest.json", &manifest)
}
