//! The two design commands: restart fan-out, best-run selection, and
//! artifact emission.
//!
//! Restart `r` runs with the configured seed for `r = 0` and a derived
//! stream seed otherwise, so a single-restart CLI run reproduces a library
//! call with the same config. Restarts execute on independent threads and
//! the winner is the lowest final objective, earliest restart on ties.

use std::path::Path;
use std::thread;

use serde::Serialize;

use slowtime::codebook::{Codebook, LabeledCodeSet};
use slowtime::metrics::{isl, psl_db, write_cut_csv, zero_delay_cut, RegionSpec};
use slowtime::pcaf::{objective_siso, pcaf_grid};
use slowtime::siso::{design_siso, doppler_shift_pair, DesignMode, SisoDesignResult};
use slowtime::types::{derive_seed, Code, CodeSet, DesignConfig};
use slowtime::{Error, Result};

use crate::manifest;
use crate::pairs::{all_pairs, lookup};
use crate::report::{grid_db_csv, MetricsJson};
use crate::store::{hash_input, ArtifactStore};
use crate::{inputs, DesignMimoArgs, DesignSisoArgs, SisoMode};

fn restart_seeds(base: u64, restarts: usize) -> Vec<u64> {
    (0..restarts)
        .map(|r| {
            if r == 0 {
                base
            } else {
                derive_seed(base, r as u64)
            }
        })
        .collect()
}

/// Run one job per seed on its own thread; results come back in seed
/// order and the first failure (in that order) wins error reporting.
fn run_restarts<R, F>(seeds: &[u64], job: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, u64) -> Result<R> + Sync,
{
    let mut slots: Vec<Option<Result<R>>> = seeds.iter().map(|_| None).collect();
    thread::scope(|scope| {
        for (index, slot) in slots.iter_mut().enumerate() {
            let seed = seeds[index];
            let job = &job;
            scope.spawn(move || {
                *slot = Some(job(index, seed));
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every restart thread fills its slot"))
        .collect()
}

fn argmin_by_key<T>(items: &[T], key: impl Fn(&T) -> f64) -> usize {
    let mut best = 0;
    for i in 1..items.len() {
        if key(&items[i]) < key(&items[best]) {
            best = i;
        }
    }
    best
}

fn require_restarts(restarts: usize) -> Result<()> {
    if restarts == 0 {
        return Err(Error::Validation("restarts must be at least 1".into()));
    }
    Ok(())
}

fn config_snapshot(cfg: &DesignConfig) -> Result<serde_json::Value> {
    serde_json::to_value(cfg).map_err(|e| Error::Validation(format!("cannot snapshot config: {e}")))
}

#[derive(Serialize)]
struct SisoResultJson {
    mode: String,
    restart_index: usize,
    seed: u64,
    x_phases: Vec<f64>,
    y_phases: Vec<f64>,
    objective_trace: Vec<f64>,
    outer_iterations: usize,
    converged: bool,
}

pub fn run_siso(args: DesignSisoArgs) -> Result<()> {
    let started = manifest::now_unix();
    require_restarts(args.restarts)?;
    let cfg = inputs::load_config(&args.config)?;
    let input_records = vec![hash_input(&args.config)?];

    let (chosen, restart_index, seeds, mode_name) = match args.mode {
        SisoMode::Doppler => {
            if args.restarts > 1 {
                eprintln!("doppler mode is closed form; ignoring --restarts");
            }
            let (x, y) = doppler_shift_pair(cfg.n_len)?;
            let objective = objective_siso(&x, &y, &cfg)?;
            let result = SisoDesignResult {
                x,
                y,
                objective_trace: vec![objective],
                outer_iterations: 0,
                converged: true,
            };
            (result, 0, Vec::new(), "doppler")
        }
        SisoMode::Optimize | SisoMode::SingleSided => {
            let (design_mode, mode_name) = match args.mode {
                SisoMode::Optimize => (DesignMode::Paired, "optimize"),
                _ => (DesignMode::SingleSided, "single-sided"),
            };
            // Single-sided runs model an uncoordinated partner, which
            // transmits no code at all: hold y at all ones.
            let fixed_y = match design_mode {
                DesignMode::SingleSided => Some(Code::ones(cfg.n_len)?),
                DesignMode::Paired => None,
            };
            let seeds = restart_seeds(cfg.seed, args.restarts);
            let runs = run_restarts(&seeds, |index, seed| {
                let mut run_cfg = cfg.clone();
                run_cfg.seed = seed;
                let run = design_siso(&run_cfg, None, fixed_y.as_ref(), design_mode)?;
                eprintln!(
                    "restart {index}: objective {:.6e} after {} outer iterations (converged: {})",
                    run.final_objective(),
                    run.outer_iterations,
                    run.converged
                );
                Ok(run)
            })?;
            let best = argmin_by_key(&runs, |r| r.final_objective());
            eprintln!("selected restart {best} (seed {})", seeds[best]);
            let chosen = runs
                .into_iter()
                .nth(best)
                .expect("argmin index is in range");
            (chosen, best, seeds, mode_name)
        }
    };

    let mut store = ArtifactStore::create(&args.out)?;
    let seed_used = seeds.get(restart_index).copied().unwrap_or(cfg.seed);
    store.write_json(
        "result.json",
        &SisoResultJson {
            mode: mode_name.to_string(),
            restart_index,
            seed: seed_used,
            x_phases: chosen.x.phases().to_vec(),
            y_phases: chosen.y.phases().to_vec(),
            objective_trace: chosen.objective_trace.clone(),
            outer_iterations: chosen.outer_iterations,
            converged: chosen.converged,
        },
    )?;

    let book = Codebook::new(vec![
        LabeledCodeSet {
            label: "x".into(),
            set: CodeSet::new(vec![chosen.x.clone()])?,
        },
        LabeledCodeSet {
            label: "y".into(),
            set: CodeSet::new(vec![chosen.y.clone()])?,
        },
    ])?;
    store.write_text("codebook.json", &book.to_json_string()?)?;

    let grid = pcaf_grid(&chosen.x, &chosen.y, &cfg)?;
    let cut = zero_delay_cut(&grid);
    let mut cut_bytes = Vec::new();
    write_cut_csv(&cut, &mut cut_bytes).expect("writing to memory cannot fail");
    store.write_bytes("cut.csv", &cut_bytes)?;

    let region = RegionSpec::zero_delay(cfg.p_max);
    store.write_json(
        "metrics.json",
        &MetricsJson {
            psl_db: psl_db(&grid, &region)?,
            isl: isl(&grid, &region)?,
            region,
            code_labels: vec!["x".into(), "y".into()],
        },
    )?;

    manifest::finish(
        &mut store,
        config_snapshot(&cfg)?,
        seeds,
        started,
        input_records,
    )
}

#[derive(Serialize)]
struct MimoResultJson {
    restart_index: usize,
    seed: u64,
    x_phases: Vec<Vec<f64>>,
    y_phases: Vec<Vec<f64>>,
    surrogate_trace: Vec<f64>,
    quartic_trace: Vec<f64>,
    outer_iterations: usize,
    converged: bool,
    zeta: f64,
}

fn load_warm_start(
    path: &Path,
    cfg: &DesignConfig,
    m: usize,
    k: usize,
) -> Result<(Vec<Code>, Vec<Code>)> {
    let book = Codebook::load(path)?;
    if book.n_len() != cfg.n_len {
        return Err(Error::LengthMismatch(format!(
            "warm-start codes have length {}, config expects {}",
            book.n_len(),
            cfg.n_len
        )));
    }
    let take = |label: &str, want: usize| -> Result<Vec<Code>> {
        if want == 0 {
            return Ok(Vec::new());
        }
        let set = book.find(label).ok_or_else(|| {
            Error::Validation(format!(
                "warm-start codebook has no set labeled \"{label}\""
            ))
        })?;
        if set.set.count() != want {
            return Err(Error::LengthMismatch(format!(
                "warm-start set \"{label}\" holds {} codes, expected {want}",
                set.set.count()
            )));
        }
        Ok(set.set.codes().to_vec())
    };
    Ok((take("x", m)?, take("y", k)?))
}

pub fn run_mimo(args: DesignMimoArgs) -> Result<()> {
    let started = manifest::now_unix();
    require_restarts(args.restarts)?;
    let cfg = inputs::load_config(&args.config)?;
    let mut input_records = vec![hash_input(&args.config)?];

    let warm = match &args.warm_start {
        Some(path) => {
            input_records.push(hash_input(path)?);
            Some(load_warm_start(path, &cfg, args.m, args.k)?)
        }
        None => None,
    };

    let seeds = restart_seeds(cfg.seed, args.restarts);
    let runs = run_restarts(&seeds, |index, seed| {
        let mut run_cfg = cfg.clone();
        run_cfg.seed = seed;
        let (x0, y0) = match &warm {
            Some((x, y)) => (Some(x.as_slice()), Some(y.as_slice())),
            None => (None, None),
        };
        let run = slowtime::mimo::design_mimo(&run_cfg, args.m, args.k, x0, y0)?;
        eprintln!(
            "restart {index}: surrogate {:.6e}, quartic {:.6e} after {} iterations (converged: {})",
            run.surrogate_trace.last().copied().unwrap_or(f64::NAN),
            run.final_quartic(),
            run.outer_iterations,
            run.converged
        );
        Ok(run)
    })?;
    let best = argmin_by_key(&runs, |r| {
        r.surrogate_trace.last().copied().unwrap_or(f64::INFINITY)
    });
    eprintln!("selected restart {best} (seed {})", seeds[best]);
    let chosen = runs
        .into_iter()
        .nth(best)
        .expect("argmin index is in range");

    let mut store = ArtifactStore::create(&args.out)?;
    store.write_json(
        "result.json",
        &MimoResultJson {
            restart_index: best,
            seed: seeds[best],
            x_phases: chosen.x.iter().map(|c| c.phases().to_vec()).collect(),
            y_phases: chosen.y.iter().map(|c| c.phases().to_vec()).collect(),
            surrogate_trace: chosen.surrogate_trace.clone(),
            quartic_trace: chosen.quartic_trace.clone(),
            outer_iterations: chosen.outer_iterations,
            converged: chosen.converged,
            zeta: chosen.zeta,
        },
    )?;

    let mut sets = vec![LabeledCodeSet {
        label: "x".into(),
        set: CodeSet::new(chosen.x.clone())?,
    }];
    if !chosen.y.is_empty() {
        sets.push(LabeledCodeSet {
            label: "y".into(),
            set: CodeSet::new(chosen.y.clone())?,
        });
    }
    let book = Codebook::new(sets)?;
    store.write_text("codebook.json", &book.to_json_string()?)?;

    let region = RegionSpec::zero_delay(cfg.p_max);
    let mut entries = Vec::new();
    for (a, b) in all_pairs(&book) {
        let grid = pcaf_grid(lookup(&book, &a)?, lookup(&book, &b)?, &cfg)?;
        store.write_bytes(
            &format!("pairs/{}-{}.csv", a.file_part(), b.file_part()),
            &grid_db_csv(&grid),
        )?;
        entries.push(MetricsJson {
            psl_db: psl_db(&grid, &region)?,
            isl: isl(&grid, &region)?,
            region: region.clone(),
            code_labels: vec![a.display(), b.display()],
        });
    }
    store.write_json("metrics.json", &entries)?;

    manifest::finish(
        &mut store,
        config_snapshot(&cfg)?,
        seeds,
        started,
        input_records,
    )
}
