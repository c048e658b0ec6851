//! The simulate command: sample synthesis, range-Doppler processing, and
//! peak extraction.
//!
//! Maps are Hann windowed on both axes and padded to the next power of
//! two, the usual detection front end. The peak table reports local
//! maxima of the magnitude surface: Doppler neighbors wrap, range
//! neighbors clamp at the map edge, and plateau ties go to the
//! lexicographically smallest cell so each plateau yields one peak.

use std::path::Path;

use serde::Serialize;

use slowtime::codebook::Codebook;
use slowtime::fmcw::{range_doppler_map, synthesize_samples, CodingMode, RangeDopplerMap, Window};
use slowtime::metrics::amplitude_db;
use slowtime::types::FmcwParams;
use slowtime::{Error, Result};

use crate::manifest;
use crate::store::{hash_input, ArtifactStore};
use crate::{inputs, SimulateArgs};

/// Rows in the emitted peak table.
const PEAK_COUNT: usize = 10;

#[derive(Serialize)]
struct PeakJson {
    k: usize,
    p: usize,
    range_m: f64,
    velocity_mps: f64,
    /// Relative to the strongest cell in the map.
    db: f64,
}

fn local_peaks(map: &RangeDopplerMap, params: &FmcwParams) -> Vec<PeakJson> {
    let pad_m = map.pad_m();
    let pad_n = map.pad_n();
    let (_, _, reference) = map.global_peak();
    let magnitude = |k: usize, p: usize| map.value(k, p).norm();

    let mut found: Vec<(usize, usize, f64)> = Vec::new();
    for k in 0..pad_m {
        for p in 0..pad_n {
            let value = magnitude(k, p);
            if value <= 0.0 {
                continue;
            }
            let mut is_peak = true;
            'neighbors: for dk in -1isize..=1 {
                for dp in -1isize..=1 {
                    if dk == 0 && dp == 0 {
                        continue;
                    }
                    let kk = k as isize + dk;
                    if kk < 0 || kk >= pad_m as isize {
                        continue;
                    }
                    let pp = (p as isize + dp).rem_euclid(pad_n as isize) as usize;
                    let other = magnitude(kk as usize, pp);
                    if other > value || (other == value && (kk as usize, pp) < (k, p)) {
                        is_peak = false;
                        break 'neighbors;
                    }
                }
            }
            if is_peak {
                found.push((k, p, value));
            }
        }
    }
    found.sort_by(|a, b| b.2.total_cmp(&a.2));
    found.truncate(PEAK_COUNT);
    found
        .into_iter()
        .map(|(k, p, value)| {
            let signed_bin = if p > pad_n / 2 {
                p as isize - pad_n as isize
            } else {
                p as isize
            };
            PeakJson {
                k,
                p,
                range_m: k as f64 * map.range_bin_m(params),
                velocity_mps: signed_bin as f64 * map.velocity_bin_mps(params),
                db: amplitude_db(value, reference),
            }
        })
        .collect()
}

/// First set is the victim's code, second the interferer's; the first
/// code of each applies.
fn coding_from_book(path: &Path, n_slow: usize) -> Result<CodingMode> {
    let book = Codebook::load(path)?;
    if book.n_len() != n_slow {
        return Err(Error::LengthMismatch(format!(
            "codebook codes have length {}, scenario has n_slow = {n_slow}",
            book.n_len()
        )));
    }
    let sets = book.sets();
    if sets.len() < 2 {
        return Err(Error::Validation(
            "simulation codebook needs two sets: the victim's first, the interferer's second"
                .into(),
        ));
    }
    let own = sets[0]
        .set
        .codes()
        .first()
        .cloned()
        .ok_or_else(|| Error::Validation("victim set is empty".into()))?;
    let other = sets[1]
        .set
        .codes()
        .first()
        .cloned()
        .ok_or_else(|| Error::Validation("interferer set is empty".into()))?;
    Ok(CodingMode::Coded { own, other })
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let started = manifest::now_unix();
    let scenario = inputs::load_scenario(&args.scenario)?;
    let mut input_records = vec![hash_input(&args.scenario)?];

    let coding = match &args.codebook {
        None => CodingMode::Uncoded,
        Some(path) => {
            input_records.push(hash_input(path)?);
            coding_from_book(path, scenario.params.n_slow)?
        }
    };

    eprintln!(
        "synthesizing {} x {} samples ({} emitters)",
        scenario.params.m_fast,
        scenario.params.n_slow,
        scenario.emitters.len()
    );
    let samples = synthesize_samples(&scenario, &coding)?;
    let map = range_doppler_map(&samples, Window::Hann, None, None)?;
    eprintln!("map {} x {}", map.pad_m(), map.pad_n());

    let mut store = ArtifactStore::create(&args.out)?;
    let mut csv = Vec::new();
    map.write_db_csv(&mut csv)
        .expect("writing to memory cannot fail");
    store.write_bytes("rd_db.csv", &csv)?;
    let mut raw = Vec::new();
    map.write_raw(&mut raw)
        .expect("writing to memory cannot fail");
    store.write_bytes("rd.raw", &raw)?;
    store.write_json("rd.json", &map.sidecar())?;
    store.write_json("peaks.json", &local_peaks(&map, &scenario.params))?;

    let snapshot = serde_json::to_value(&scenario)
        .map_err(|e| Error::Validation(format!("cannot snapshot scenario: {e}")))?;
    manifest::finish(
        &mut store,
        snapshot,
        vec![scenario.seed],
        started,
        input_records,
    )
}
