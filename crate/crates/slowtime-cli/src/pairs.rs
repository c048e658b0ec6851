//! Code addressing and pair enumeration over a codebook.
//!
//! A single code is addressed as `label/index`, splitting on the last
//! slash, so `x/0` is the first code of set `x`. A pair is two addresses
//! joined by a colon; a pair list is comma separated.

use slowtime::codebook::Codebook;
use slowtime::types::Code;
use slowtime::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRef {
    pub label: String,
    pub index: usize,
}

impl CodeRef {
    pub fn display(&self) -> String {
        format!("{}/{}", self.label, self.index)
    }

    /// Name component safe for file systems: non-alphanumeric label
    /// characters collapse to underscores.
    pub fn file_part(&self) -> String {
        let safe: String = self
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        format!("{safe}_{}", self.index)
    }
}

pub fn lookup<'b>(book: &'b Codebook, code: &CodeRef) -> Result<&'b Code> {
    let set = book.find(&code.label).ok_or_else(|| {
        Error::Validation(format!("codebook has no set labeled \"{}\"", code.label))
    })?;
    set.set.codes().get(code.index).ok_or_else(|| {
        Error::Validation(format!(
            "set \"{}\" holds {} codes, index {} is out of range",
            code.label,
            set.set.count(),
            code.index
        ))
    })
}

fn parse_ref(text: &str) -> Result<CodeRef> {
    let (label, idx) = text
        .rsplit_once('/')
        .ok_or_else(|| Error::Validation(format!("code address \"{text}\" is not label/index")))?;
    if label.is_empty() {
        return Err(Error::Validation(format!(
            "code address \"{text}\" has an empty label"
        )));
    }
    let index: usize = idx.parse().map_err(|_| {
        Error::Validation(format!("code address \"{text}\" has a non-numeric index"))
    })?;
    Ok(CodeRef {
        label: label.to_string(),
        index,
    })
}

/// Every unordered pair of distinct codes: within each set and across
/// set boundaries, in set order then index order.
pub fn all_pairs(book: &Codebook) -> Vec<(CodeRef, CodeRef)> {
    let mut flat = Vec::new();
    for set in book.sets() {
        for index in 0..set.set.count() {
            flat.push(CodeRef {
                label: set.label.clone(),
                index,
            });
        }
    }
    let mut out = Vec::new();
    for i in 0..flat.len() {
        for j in (i + 1)..flat.len() {
            out.push((flat[i].clone(), flat[j].clone()));
        }
    }
    out
}

/// Parse `--pairs`: the keyword `all` or an explicit list. Every address
/// is checked against the codebook so unknown labels fail before any
/// computation runs.
pub fn parse_pairs(spec: &str, book: &Codebook) -> Result<Vec<(CodeRef, CodeRef)>> {
    if spec.trim() == "all" {
        return Ok(all_pairs(book));
    }
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(Error::Validation("empty entry in pair list".into()));
        }
        let (a, b) = item.split_once(':').ok_or_else(|| {
            Error::Validation(format!(
                "pair \"{item}\" is not address:address (like x/0:y/1)"
            ))
        })?;
        let a = parse_ref(a.trim())?;
        let b = parse_ref(b.trim())?;
        lookup(book, &a)?;
        lookup(book, &b)?;
        out.push((a, b));
    }
    if out.is_empty() {
        return Err(Error::Validation("pair list selects nothing".into()));
    }
    Ok(out)
}
