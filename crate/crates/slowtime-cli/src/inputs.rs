//! JSON input loading with path-tagged parse errors.

use std::path::Path;

use serde::de::DeserializeOwned;

use slowtime::fmcw::SimScenario;
use slowtime::metrics::RegionSpec;
use slowtime::types::DesignConfig;
use slowtime::{Error, Result};

fn load_json<T: DeserializeOwned>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: format!("{what}: {e}"),
    })
}

pub fn load_config(path: &Path) -> Result<DesignConfig> {
    let cfg: DesignConfig = load_json(path, "design config")?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: &Path) -> Result<SimScenario> {
    let sc: SimScenario = load_json(path, "scenario")?;
    sc.validate()?;
    Ok(sc)
}

pub fn load_region(path: &Path) -> Result<RegionSpec> {
    load_json(path, "region spec")
}
