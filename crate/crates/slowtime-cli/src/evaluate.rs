//! The evaluate command: ambiguity grids and sidelobe metrics for stored
//! codes.
//!
//! The region defaults to the zero-delay band `|p| <= p_max`. A matched
//! pair (a code against itself) would report its own mainlobe as the peak
//! sidelobe, so self pairs exclude the `(0, 0)` cell automatically
//! whenever the region covers it.

use slowtime::codebook::Codebook;
use slowtime::metrics::{isl, psl_db, RegionSpec};
use slowtime::pcaf::{pcaf_grid, PcafGrid};
use slowtime::types::DesignConfig;
use slowtime::{Error, Result};

use crate::manifest;
use crate::pairs::{lookup, parse_pairs};
use crate::report::{grid_db_csv, MetricsJson};
use crate::store::{hash_input, ArtifactStore};
use crate::{inputs, EvaluateArgs};

fn region_for_pair(base: &RegionSpec, self_pair: bool, grid: &PcafGrid) -> Result<RegionSpec> {
    if !self_pair {
        return Ok(base.clone());
    }
    let cells = base.resolve(grid)?;
    if cells.contains(&(0, 0)) {
        return Ok(base.clone().with_exclusions([(0, 0)]));
    }
    Ok(base.clone())
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let started = manifest::now_unix();
    let book = Codebook::load(&args.codebook)?;
    let mut input_records = vec![hash_input(&args.codebook)?];

    let cfg = match &args.config {
        Some(path) => {
            input_records.push(hash_input(path)?);
            let cfg = inputs::load_config(path)?;
            if cfg.n_len != book.n_len() {
                return Err(Error::LengthMismatch(format!(
                    "config n_len = {} but codebook codes have length {}",
                    cfg.n_len,
                    book.n_len()
                )));
            }
            cfg
        }
        None => DesignConfig::default_for(book.n_len()),
    };

    let base_region = match &args.region {
        Some(path) => {
            input_records.push(hash_input(path)?);
            inputs::load_region(path)?
        }
        None => RegionSpec::zero_delay(cfg.p_max),
    };

    let pair_list = parse_pairs(&args.pairs, &book)?;
    let mut store = ArtifactStore::create(&args.out)?;
    let mut entries = Vec::new();
    for (a, b) in &pair_list {
        let grid = pcaf_grid(lookup(&book, a)?, lookup(&book, b)?, &cfg)?;
        let region = region_for_pair(&base_region, a == b, &grid)?;
        let psl = psl_db(&grid, &region)?;
        let isl_value = isl(&grid, &region)?;
        eprintln!(
            "{} vs {}: psl {:.2} dB, isl {:.4e}",
            a.display(),
            b.display(),
            psl,
            isl_value
        );
        store.write_bytes(
            &format!("{}-{}.csv", a.file_part(), b.file_part()),
            &grid_db_csv(&grid),
        )?;
        entries.push(MetricsJson {
            psl_db: psl,
            isl: isl_value,
            region,
            code_labels: vec![a.display(), b.display()],
        });
    }
    store.write_json("metrics.json", &entries)?;

    let snapshot = serde_json::to_value(&cfg)
        .map_err(|e| Error::Validation(format!("cannot snapshot config: {e}")))?;
    manifest::finish(&mut store, snapshot, Vec::new(), started, input_records)
}
