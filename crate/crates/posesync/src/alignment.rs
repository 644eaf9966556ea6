//! Alignment result files.
//!
//! ```text
//! {
//!   "total_cost": 1.25,
//!   "normalized_cost": 0.0125,
//!   "path": [[0, 0], [0, 1], [1, 2], ...],
//!   "ref_to_test": [{"ref": 0, "test": [0, 1], "rep": 0}, ...],
//!   "step_costs": [0.0, 0.01, ...]
//! }
//! ```
//!
//! `step_costs` is optional on input. Loading checks the path against the
//! grid it spans and requires `ref_to_test` to agree with it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use posealign_core::dtw::{extract_mapping, AlignmentResult, RefMatch, WarpingPath};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum AlignmentFileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RefDoc {
    #[serde(rename = "ref")]
    reference: usize,
    test: Vec<usize>,
    rep: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlignmentDoc {
    total_cost: f64,
    normalized_cost: f64,
    path: Vec<(usize, usize)>,
    ref_to_test: Vec<RefDoc>,
    #[serde(default)]
    step_costs: Option<Vec<f64>>,
}

fn compact(v: &impl Serialize) -> String {
    serde_json::to_string(v).expect("alignment values serialize")
}

/// One top-level key per line; values are compact.
pub fn alignment_to_string(result: &AlignmentResult) -> String {
    let refs: Vec<RefDoc> = result
        .ref_to_test
        .iter()
        .enumerate()
        .map(|(i, m)| RefDoc {
            reference: i,
            test: m.test.clone(),
            rep: m.representative,
        })
        .collect();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"total_cost\": {},", compact(&result.total_cost));
    let _ = writeln!(
        out,
        "  \"normalized_cost\": {},",
        compact(&result.normalized_cost)
    );
    let _ = writeln!(out, "  \"path\": {},", compact(&result.path.0));
    let _ = writeln!(out, "  \"ref_to_test\": {},", compact(&refs));
    let _ = writeln!(out, "  \"step_costs\": {}", compact(&result.step_costs));
    out.push_str("}\n");
    out
}

/// Parses an alignment document. When `step_costs` is absent the result
/// carries an empty `step_costs` vector.
pub fn parse_alignment(text: &str) -> Result<AlignmentResult, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let doc: AlignmentDoc = serde_json::from_value(value).map_err(|e| e.to_string())?;
    if doc.path.is_empty() {
        return Err("path is empty".into());
    }
    let n_ref = doc.path.iter().map(|p| p.0).max().unwrap_or(0) + 1;
    let n_test = doc.path.iter().map(|p| p.1).max().unwrap_or(0) + 1;
    let path = WarpingPath(doc.path);
    path.check(n_ref, n_test)
        .map_err(|v| format!("invalid warping path: {v}"))?;
    let mapping = extract_mapping(&path);
    let given: Vec<RefMatch> = doc
        .ref_to_test
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if r.reference != i {
                Err(format!("ref_to_test entry {i} has ref {}", r.reference))
            } else {
                Ok(RefMatch {
                    test: r.test.clone(),
                    representative: r.rep,
                })
            }
        })
        .collect::<Result<_, _>>()?;
    if given != mapping {
        return Err("ref_to_test does not agree with path".into());
    }
    for (name, v) in [
        ("total_cost", doc.total_cost),
        ("normalized_cost", doc.normalized_cost),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(format!("{name} must be a non-negative number"));
        }
    }
    let step_costs = doc.step_costs.unwrap_or_default();
    if !step_costs.is_empty() {
        if step_costs.len() != path.len() {
            return Err(format!(
                "step_costs has {} entries for a path of {}",
                step_costs.len(),
                path.len()
            ));
        }
        if step_costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err("step_costs must be non-negative numbers".into());
        }
    }
    Ok(AlignmentResult {
        path,
        step_costs,
        total_cost: doc.total_cost,
        normalized_cost: doc.normalized_cost,
        ref_to_test: mapping,
    })
}

pub fn load_alignment(path: impl AsRef<Path>) -> Result<AlignmentResult, AlignmentFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| AlignmentFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_alignment(&text).map_err(|message| AlignmentFileError::Invalid {
        path: path.to_owned(),
        message,
    })
}

pub fn save_alignment(result: &AlignmentResult, path: impl AsRef<Path>) -> std::io::Result<()> {
    fs::write(path, alignment_to_string(result))
}

/// Two-column `ref,test` CSV of the warping path.
pub fn path_csv(path: &WarpingPath) -> String {
    let mut out = String::from("ref,test\n");
    for &(i, j) in path.pairs() {
        let _ = writeln!(out, "{i},{j}");
    }
    out
}
