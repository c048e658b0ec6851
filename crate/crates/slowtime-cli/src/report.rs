//! Shared export shapes for metric reports and grid CSV rendering.

use serde::Serialize;

use slowtime::metrics::RegionSpec;
use slowtime::pcaf::PcafGrid;

/// One metric record: sidelobe numbers, the region they were measured
/// over, and which codes the grid compares.
#[derive(Serialize)]
pub struct MetricsJson {
    pub psl_db: f64,
    pub isl: f64,
    pub region: RegionSpec,
    pub code_labels: Vec<String>,
}

pub fn grid_db_csv(grid: &PcafGrid) -> Vec<u8> {
    let mut out = Vec::new();
    grid.write_db_csv(&mut out)
        .expect("writing to memory cannot fail");
    out
}
