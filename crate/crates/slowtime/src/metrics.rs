//! Sidelobe metrics over user-selectable regions of an ambiguity grid.
//!
//! A [`RegionSpec`] names the lag rows and Doppler columns under scrutiny
//! plus individual excluded cells; [`psl_db`] and [`isl`] then reduce the
//! grid over exactly those cells. Levels are expressed in dB relative to
//! the matched-pair mainlobe value `N`, so 0 dB means "as strong as a
//! perfectly aligned copy of the victim's own return".

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::mat::norm_sqr_kahan;
use crate::pcaf::PcafGrid;
use crate::{Error, Result};

/// Floor applied to every dB conversion so exact zeros stay finite.
pub const DB_FLOOR: f64 = -300.0;

/// `20 log10(mag / reference)`, floored at [`DB_FLOOR`].
pub fn amplitude_db(mag: f64, reference: f64) -> f64 {
    debug_assert!(reference > 0.0);
    if mag <= 0.0 {
        return DB_FLOOR;
    }
    (20.0 * (mag / reference).log10()).max(DB_FLOOR)
}

/// A set of indices along one grid axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IndexSetDto", into = "IndexSetDto")]
pub enum IndexSet {
    /// Every index the grid stores on this axis.
    All,
    /// An explicit list; duplicates collapse.
    Only(Vec<isize>),
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum IndexSetDto {
    Name(String),
    List(Vec<isize>),
}

impl TryFrom<IndexSetDto> for IndexSet {
    type Error = String;
    fn try_from(dto: IndexSetDto) -> std::result::Result<Self, String> {
        match dto {
            IndexSetDto::Name(s) if s == "all" => Ok(IndexSet::All),
            IndexSetDto::Name(s) => Err(format!(
                "index set must be \"all\" or a list of integers, got \"{s}\""
            )),
            IndexSetDto::List(v) => Ok(IndexSet::Only(v)),
        }
    }
}

impl From<IndexSet> for IndexSetDto {
    fn from(set: IndexSet) -> IndexSetDto {
        match set {
            IndexSet::All => IndexSetDto::Name("all".into()),
            IndexSet::Only(v) => IndexSetDto::List(v),
        }
    }
}

/// The grid cells a metric ranges over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub lags: IndexSet,
    pub bins: IndexSet,
    /// Individual `(lag, bin)` cells removed from the region. Every
    /// exclusion must lie inside the region it is removed from.
    #[serde(default)]
    pub exclusions: Vec<(isize, isize)>,
}

impl RegionSpec {
    /// The whole grid.
    pub fn full() -> Self {
        RegionSpec {
            lags: IndexSet::All,
            bins: IndexSet::All,
            exclusions: Vec::new(),
        }
    }

    /// The zero-delay row across bins `-p_max..=p_max`: the band where a
    /// code-aligned interferer would land.
    pub fn zero_delay(p_max: usize) -> Self {
        let p = p_max as isize;
        RegionSpec {
            lags: IndexSet::Only(vec![0]),
            bins: IndexSet::Only((-p..=p).collect()),
            exclusions: Vec::new(),
        }
    }

    /// Add excluded cells, builder style.
    pub fn with_exclusions(mut self, cells: impl IntoIterator<Item = (isize, isize)>) -> Self {
        self.exclusions.extend(cells);
        self
    }

    /// Expand to concrete cells of `grid` in lag-major order, after
    /// validating bounds, exclusion membership, and non-emptiness.
    pub fn resolve(&self, grid: &PcafGrid) -> Result<Vec<(isize, isize)>> {
        let lag_limit = grid.n_len() as isize - 1;
        let bin_limit = grid.p_max() as isize;
        let lags = resolve_axis(&self.lags, lag_limit, "lag", grid.n_len())?;
        let bins = resolve_axis(&self.bins, bin_limit, "bin", grid.n_len())?;
        let lag_set: BTreeSet<isize> = lags.iter().copied().collect();
        let bin_set: BTreeSet<isize> = bins.iter().copied().collect();
        let mut excluded = BTreeSet::new();
        for &(l, p) in &self.exclusions {
            if !lag_set.contains(&l) || !bin_set.contains(&p) {
                return Err(Error::Validation(format!(
                    "exclusion ({l}, {p}) lies outside the region"
                )));
            }
            excluded.insert((l, p));
        }
        let mut cells = Vec::with_capacity(lag_set.len() * bin_set.len());
        for &l in &lag_set {
            for &p in &bin_set {
                if !excluded.contains(&(l, p)) {
                    cells.push((l, p));
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyRegion(
                "region excludes every cell it selects".into(),
            ));
        }
        Ok(cells)
    }
}

fn resolve_axis(set: &IndexSet, limit: isize, axis: &str, n_len: usize) -> Result<Vec<isize>> {
    match set {
        IndexSet::All => Ok((-limit..=limit).collect()),
        IndexSet::Only(list) => {
            if list.is_empty() {
                return Err(Error::EmptyRegion(format!("{axis} list is empty")));
            }
            for &v in list {
                if v.abs() > limit {
                    if axis == "lag" {
                        return Err(Error::LagOutOfRange { lag: v, n_len });
                    }
                    return Err(Error::Validation(format!(
                        "{axis} {v} outside stored range -{limit}..={limit}"
                    )));
                }
            }
            Ok(list.clone())
        }
    }
}

/// Peak sidelobe level over the region, in dB relative to the mainlobe
/// value `N`.
pub fn psl_db(grid: &PcafGrid, region: &RegionSpec) -> Result<f64> {
    let cells = region.resolve(grid)?;
    let peak = cells
        .iter()
        .map(|&(l, p)| grid.value(l, p).norm())
        .fold(0.0, f64::max);
    Ok(amplitude_db(peak, grid.n_len() as f64))
}

/// Integrated sidelobe level over the region: `sum |r|^2`, compensated
/// summation in cell order.
pub fn isl(grid: &PcafGrid, region: &RegionSpec) -> Result<f64> {
    let cells = region.resolve(grid)?;
    let values: Vec<_> = cells.iter().map(|&(l, p)| grid.value(l, p)).collect();
    Ok(norm_sqr_kahan(&values))
}

/// The zero-delay row as `(bin, dB)` pairs across the stored band.
pub fn zero_delay_cut(grid: &PcafGrid) -> Vec<(isize, f64)> {
    let reference = grid.n_len() as f64;
    grid.bins()
        .map(|p| (p, amplitude_db(grid.value(0, p).norm(), reference)))
        .collect()
}

/// Write a cut as `p,db` CSV rows with a header.
pub fn write_cut_csv<W: Write>(cut: &[(isize, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "p,db")?;
    for (p, db) in cut {
        writeln!(out, "{p},{db}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcaf::{objective_siso, pcaf_grid};
    use crate::types::{random_unimodular_code, DesignConfig};

    fn small_grid() -> PcafGrid {
        let cfg = DesignConfig {
            n_len: 8,
            p_max: 3,
            n_f: 16,
            ..DesignConfig::default_for(8)
        };
        let x = random_unimodular_code(8, 1).unwrap();
        let y = random_unimodular_code(8, 2).unwrap();
        pcaf_grid(&x, &y, &cfg).unwrap()
    }

    #[test]
    fn amplitude_db_floors_at_zero_magnitude() {
        assert_eq!(amplitude_db(0.0, 8.0), DB_FLOOR);
        assert!((amplitude_db(8.0, 8.0) - 0.0).abs() < 1e-12);
        assert!((amplitude_db(0.8, 8.0) + 20.0).abs() < 1e-9);
    }

    #[test]
    fn zero_delay_region_has_expected_cells() {
        let grid = small_grid();
        let cells = RegionSpec::zero_delay(3).resolve(&grid).unwrap();
        assert_eq!(cells.len(), 7);
        assert!(cells.iter().all(|&(l, _)| l == 0));
    }

    #[test]
    fn full_region_isl_equals_objective() {
        let cfg = DesignConfig {
            n_len: 8,
            p_max: 3,
            n_f: 16,
            ..DesignConfig::default_for(8)
        };
        let x = random_unimodular_code(8, 1).unwrap();
        let y = random_unimodular_code(8, 2).unwrap();
        let grid = pcaf_grid(&x, &y, &cfg).unwrap();
        let energy = isl(&grid, &RegionSpec::full()).unwrap();
        let j = objective_siso(&x, &y, &cfg).unwrap();
        assert!((energy - j).abs() < 1e-9 * j);
    }

    #[test]
    fn matched_pair_psl_is_zero_until_mainlobe_excluded() {
        let cfg = DesignConfig {
            n_len: 8,
            p_max: 3,
            n_f: 16,
            ..DesignConfig::default_for(8)
        };
        let x = random_unimodular_code(8, 9).unwrap();
        let grid = pcaf_grid(&x, &x, &cfg).unwrap();
        let full = psl_db(&grid, &RegionSpec::full()).unwrap();
        assert!(full.abs() < 1e-9, "mainlobe dominates: {full}");
        let excl = RegionSpec::full().with_exclusions([(0, 0)]);
        assert!(psl_db(&grid, &excl).unwrap() < -1e-3);
    }

    #[test]
    fn psl_is_monotone_under_region_growth() {
        let grid = small_grid();
        let narrow = psl_db(&grid, &RegionSpec::zero_delay(3)).unwrap();
        let wide = psl_db(&grid, &RegionSpec::full()).unwrap();
        assert!(wide >= narrow);
    }

    #[test]
    fn exclusions_must_live_inside_the_region() {
        let grid = small_grid();
        let bad = RegionSpec::zero_delay(3).with_exclusions([(1, 0)]);
        assert!(matches!(
            bad.resolve(&grid).unwrap_err(),
            Error::Validation(_)
        ));
        let all_gone = RegionSpec {
            lags: IndexSet::Only(vec![0]),
            bins: IndexSet::Only(vec![0]),
            exclusions: vec![(0, 0)],
        };
        assert!(matches!(
            all_gone.resolve(&grid).unwrap_err(),
            Error::EmptyRegion(_)
        ));
    }

    #[test]
    fn out_of_range_lag_maps_to_dedicated_error() {
        let grid = small_grid();
        let spec = RegionSpec {
            lags: IndexSet::Only(vec![8]),
            bins: IndexSet::All,
            exclusions: vec![],
        };
        assert!(matches!(
            spec.resolve(&grid).unwrap_err(),
            Error::LagOutOfRange { lag: 8, n_len: 8 }
        ));
    }

    #[test]
    fn region_serde_accepts_all_keyword() {
        let json = r#"{"lags": "all", "bins": [-2, 0, 2], "exclusions": [[0, 0]]}"#;
        let spec: RegionSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.lags, IndexSet::All);
        assert_eq!(spec.bins, IndexSet::Only(vec![-2, 0, 2]));
        let back = serde_json::to_string(&spec).unwrap();
        let again: RegionSpec = serde_json::from_str(&back).unwrap();
        assert_eq!(again, spec);
        assert!(serde_json::from_str::<RegionSpec>(r#"{"lags": "some", "bins": "all"}"#).is_err());
    }

    #[test]
    fn cut_csv_covers_all_bins() {
        let grid = small_grid();
        let cut = zero_delay_cut(&grid);
        assert_eq!(cut.len(), 7);
        let mut buf = Vec::new();
        write_cut_csv(&cut, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 8);
    }
}
