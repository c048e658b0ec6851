//! Codebook files: labeled code sets stored as phase vectors in JSON.
//!
//! The on-disk layout is
//!
//! ```text
//! {
//!   "n_len": 64,
//!   "sets": [
//!     { "label": "tx", "phases": [[0.0, 1.57, ...], ...] },
//!     { "label": "rx", "phases": [[...], ...] }
//!   ]
//! }
//! ```
//!
//! Phases are radians. Serialization uses shortest-round-trip float
//! formatting, so a save/load cycle reproduces every phase bitwise.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::types::{Code, CodeSet};
use crate::{Error, Result};

/// A code set with the label it is addressed by on the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCodeSet {
    pub label: String,
    pub set: CodeSet,
}

/// An ordered collection of labeled code sets sharing one code length.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n_len: usize,
    sets: Vec<LabeledCodeSet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookDto {
    n_len: usize,
    sets: Vec<SetDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetDto {
    label: String,
    phases: Vec<Vec<f64>>,
}

impl Codebook {
    /// Build from labeled sets. Requires at least one set, unique non-empty
    /// labels, and one common code length.
    pub fn new(sets: Vec<LabeledCodeSet>) -> Result<Self> {
        let n_len = match sets.first() {
            Some(s) => s.set.n_len(),
            None => {
                return Err(Error::Validation(
                    "codebook must contain at least one set".into(),
                ))
            }
        };
        for (idx, s) in sets.iter().enumerate() {
            if s.label.is_empty() {
                return Err(Error::Validation(format!("set {idx} has an empty label")));
            }
            if s.set.n_len() != n_len {
                return Err(Error::LengthMismatch(format!(
                    "set '{}' has code length {}, codebook established {n_len}",
                    s.label,
                    s.set.n_len()
                )));
            }
            if sets[..idx].iter().any(|prev| prev.label == s.label) {
                return Err(Error::Validation(format!(
                    "duplicate set label '{}'",
                    s.label
                )));
            }
        }
        Ok(Codebook { n_len, sets })
    }

    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn sets(&self) -> &[LabeledCodeSet] {
        &self.sets
    }

    pub fn find(&self, label: &str) -> Option<&LabeledCodeSet> {
        self.sets.iter().find(|s| s.label == label)
    }

    /// Serialize to pretty JSON.
    pub fn to_json_string(&self) -> Result<String> {
        let dto = CodebookDto {
            n_len: self.n_len,
            sets: self
                .sets
                .iter()
                .map(|s| SetDto {
                    label: s.label.clone(),
                    phases: s.set.codes().iter().map(|c| c.phases().to_vec()).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dto)
            .map_err(|e| Error::Validation(format!("codebook serialization failed: {e}")))
    }

    /// Parse from JSON and validate every phase vector.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let dto: CodebookDto = serde_json::from_str(json)
            .map_err(|e| Error::Validation(format!("codebook JSON is malformed: {e}")))?;
        let mut sets = Vec::with_capacity(dto.sets.len());
        for s in dto.sets {
            let mut codes = Vec::with_capacity(s.phases.len());
            for (row, phases) in s.phases.iter().enumerate() {
                if phases.len() != dto.n_len {
                    return Err(Error::LengthMismatch(format!(
                        "set '{}' code {row} has {} phases, header declares n_len = {}",
                        s.label,
                        phases.len(),
                        dto.n_len
                    )));
                }
                let code = Code::from_phases(phases)
                    .map_err(|e| Error::Validation(format!("set '{}' code {row}: {e}", s.label)))?;
                codes.push(code);
            }
            sets.push(LabeledCodeSet {
                label: s.label,
                set: CodeSet::new(codes)?,
            });
        }
        Codebook::new(sets)
    }

    /// Read and parse a codebook file.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Codebook::from_json_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })
    }

    /// Serialize and write a codebook file.
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = self.to_json_string()?;
        std::fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::random_unimodular_code;

    fn sample_codebook() -> Codebook {
        let a = CodeSet::new(vec![
            random_unimodular_code(8, 1).unwrap(),
            random_unimodular_code(8, 2).unwrap(),
        ])
        .unwrap();
        let b = CodeSet::new(vec![random_unimodular_code(8, 3).unwrap()]).unwrap();
        Codebook::new(vec![
            LabeledCodeSet {
                label: "tx".into(),
                set: a,
            },
            LabeledCodeSet {
                label: "victim".into(),
                set: b,
            },
        ])
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let book = sample_codebook();
        let json = book.to_json_string().unwrap();
        let back = Codebook::from_json_str(&json).unwrap();
        assert_eq!(back, book);
        for (s0, s1) in book.sets().iter().zip(back.sets()) {
            for (c0, c1) in s0.set.codes().iter().zip(s1.set.codes()) {
                assert_eq!(c0.phases(), c1.phases());
            }
        }
    }

    #[test]
    fn rejects_length_mismatch_against_header() {
        let json = r#"{"n_len": 3, "sets": [{"label": "a", "phases": [[0.0, 0.0]]}]}"#;
        let err = Codebook::from_json_str(json).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch(_)), "got {err:?}");
    }

    #[test]
    fn rejects_non_finite_phase() {
        // 1e999 overflows f64 to infinity during JSON parsing.
        let json = r#"{"n_len": 2, "sets": [{"label": "a", "phases": [[0.0, 1e999]]}]}"#;
        let err = Codebook::from_json_str(json).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "got {err:?}");
    }

    #[test]
    fn rejects_duplicate_labels() {
        let set = CodeSet::new(vec![random_unimodular_code(4, 1).unwrap()]).unwrap();
        let err = Codebook::new(vec![
            LabeledCodeSet {
                label: "a".into(),
                set: set.clone(),
            },
            LabeledCodeSet {
                label: "a".into(),
                set,
            },
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "got {err:?}");
    }

    #[test]
    fn load_reports_the_path() {
        let err = Codebook::load(Path::new("/nonexistent/book.json")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }), "got {err:?}");
    }
}
