//! Scenario suite files.
//!
//! A suite is either `{"scenarios": [...]}` or a bare array. Each entry has a
//! `kind` plus that kind's parameters, and optionally a `name` and `seed`:
//!
//! ```text
//! {"kind": "identity"}
//! {"kind": "speed_change", "factor": 0.5, "region": [0.0, 1.0]}
//! {"kind": "insert_noise", "duration_seconds": 2, "position": "middle", "seed": 4}
//! {"kind": "insert_clip", "duration_seconds": 2, "position": "end",
//!  "donor": {"motion": "squat", "seed": 1}}            // or {"path": "clip.json"}
//! {"kind": "reorder_segments", "boundaries": [0.5], "permutation": [1, 0]}
//! {"kind": "flip_horizontal"}
//! {"kind": "zoom", "scale": 1.5, "center": [0.5, 0.5]}
//! ```
//!
//! Synthetic donors default to `duration_seconds` long at the base frame
//! rate. Donor paths are resolved against the suite file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use posealign_core::{synth_sequence, Motion, Perturbation, Position, Scenario};
use serde::Deserialize;
use serde_json::Value;

use crate::format::load_sequence;

const DEFAULT_SUITE: &str = include_str!("../data/default_suite.json");

#[derive(Debug, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}invalid JSON: {message}", origin(path))]
    Json {
        path: Option<PathBuf>,
        message: String,
    },
    #[error("{}scenario entry {index}: {message}", origin(path))]
    Entry {
        path: Option<PathBuf>,
        index: usize,
        message: String,
    },
}

fn origin(path: &Option<PathBuf>) -> String {
    path.as_ref()
        .map(|p| format!("{}: ", p.display()))
        .unwrap_or_default()
}

/// What scenario entries are resolved against.
#[derive(Debug, Clone)]
pub struct SuiteContext {
    /// Frame rate of the base sequence; synthetic donors use it too.
    pub fps: f64,
    /// Directory that relative donor paths are taken from.
    pub base_dir: PathBuf,
    /// Seed for entries that do not give one.
    pub default_seed: u64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PositionDoc {
    Start,
    Middle,
    End,
}

impl From<PositionDoc> for Position {
    fn from(p: PositionDoc) -> Self {
        match p {
            PositionDoc::Start => Position::Start,
            PositionDoc::Middle => Position::Middle,
            PositionDoc::End => Position::End,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DonorDoc {
    Synth {
        motion: String,
        #[serde(default)]
        seconds: Option<f64>,
        #[serde(default)]
        seed: u64,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpecDoc {
    Identity {},
    SpeedChange {
        factor: f64,
        #[serde(default = "whole_clip")]
        region: (f64, f64),
    },
    InsertNoise {
        duration_seconds: f64,
        position: PositionDoc,
    },
    InsertClip {
        duration_seconds: f64,
        position: PositionDoc,
        donor: DonorDoc,
    },
    ReorderSegments {
        boundaries: Vec<f64>,
        permutation: Vec<usize>,
    },
    FlipHorizontal {},
    Zoom {
        scale: f64,
        #[serde(default = "frame_center")]
        center: [f64; 2],
    },
}

fn whole_clip() -> (f64, f64) {
    (0.0, 1.0)
}

fn frame_center() -> [f64; 2] {
    [0.5, 0.5]
}

fn resolve(spec: SpecDoc, ctx: &SuiteContext) -> Result<Perturbation, String> {
    Ok(match spec {
        SpecDoc::Identity {} => Perturbation::Identity,
        SpecDoc::SpeedChange { factor, region } => Perturbation::SpeedChange { factor, region },
        SpecDoc::InsertNoise {
            duration_seconds,
            position,
        } => Perturbation::InsertNoise {
            duration_seconds,
            position: position.into(),
        },
        SpecDoc::InsertClip {
            duration_seconds,
            position,
            donor,
        } => {
            let donor = match donor {
                DonorDoc::Synth {
                    motion,
                    seconds,
                    seed,
                } => {
                    let motion: Motion = motion.parse().map_err(|e| format!("donor: {e}"))?;
                    let seconds = seconds.unwrap_or(duration_seconds);
                    synth_sequence(motion, seconds, ctx.fps, seed)
                        .map_err(|e| format!("donor: {e}"))?
                }
                DonorDoc::File { path } => {
                    load_sequence(ctx.base_dir.join(path)).map_err(|e| format!("donor: {e}"))?
                }
            };
            Perturbation::InsertClip {
                duration_seconds,
                position: position.into(),
                donor,
            }
        }
        SpecDoc::ReorderSegments {
            boundaries,
            permutation,
        } => Perturbation::ReorderSegments {
            boundaries,
            permutation,
        },
        SpecDoc::FlipHorizontal {} => Perturbation::FlipHorizontal,
        SpecDoc::Zoom { scale, center } => Perturbation::Zoom { scale, center },
    })
}

fn parse_entry(entry: &Value, ctx: &SuiteContext) -> Result<Scenario, String> {
    let mut obj = entry
        .as_object()
        .cloned()
        .ok_or_else(|| "entry must be an object".to_string())?;
    let name = match obj.remove("name") {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err("`name` must be a string".into()),
    };
    let seed = match obj.remove("seed") {
        None => ctx.default_seed,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| "`seed` must be a non-negative integer".to_string())?,
    };
    let spec: SpecDoc = serde_json::from_value(Value::Object(obj)).map_err(|e| e.to_string())?;
    let perturbation = resolve(spec, ctx)?;
    let name = name.unwrap_or_else(|| perturbation.to_string());
    Ok(Scenario::new(name, perturbation, seed))
}

fn parse_with_origin(
    text: &str,
    ctx: &SuiteContext,
    path: Option<&Path>,
) -> Result<Vec<Scenario>, ScenarioFileError> {
    let json_err = |message: String| ScenarioFileError::Json {
        path: path.map(Path::to_owned),
        message,
    };
    let value: Value = serde_json::from_str(text).map_err(|e| json_err(e.to_string()))?;
    let entries = match &value {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("scenarios")
            .and_then(Value::as_array)
            .ok_or_else(|| {
                json_err("expected an array or an object with a `scenarios` array".into())
            })?,
        _ => {
            return Err(json_err(
                "expected an array or an object with a `scenarios` array".into(),
            ))
        }
    };
    entries
        .iter()
        .enumerate()
        .map(|(index, e)| {
            parse_entry(e, ctx).map_err(|message| ScenarioFileError::Entry {
                path: path.map(Path::to_owned),
                index,
                message,
            })
        })
        .collect()
}

pub fn parse_scenarios(text: &str, ctx: &SuiteContext) -> Result<Vec<Scenario>, ScenarioFileError> {
    parse_with_origin(text, ctx, None)
}

/// Loads a suite file; relative donor paths are taken from the file's own
/// directory, overriding `ctx.base_dir`.
pub fn load_scenarios(
    path: impl AsRef<Path>,
    ctx: &SuiteContext,
) -> Result<Vec<Scenario>, ScenarioFileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.to_owned(),
        source,
    })?;
    let ctx = SuiteContext {
        base_dir: path.parent().map(Path::to_owned).unwrap_or_default(),
        ..ctx.clone()
    };
    parse_with_origin(&text, &ctx, Some(path))
}

/// The built-in suite: one scenario per kind of test video, with noise and
/// partial slowdowns at each position.
pub fn default_suite(ctx: &SuiteContext) -> Result<Vec<Scenario>, ScenarioFileError> {
    parse_scenarios(DEFAULT_SUITE, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> SuiteContext {
        SuiteContext {
            fps: 25.0,
            base_dir: PathBuf::new(),
            default_seed: 7,
        }
    }

    #[test]
    fn default_suite_parses() {
        let suite = default_suite(&ctx()).unwrap();
        assert!(suite.len() >= 8);
        assert_eq!(suite[0].perturbation, Perturbation::Identity);
        let names: std::collections::HashSet<_> = suite.iter().map(|s| &s.name).collect();
        assert_eq!(names.len(), suite.len(), "names are unique");
    }

    #[test]
    fn entries_and_defaults() {
        let s = parse_scenarios(
            r#"[{"kind": "zoom", "scale": 2}, {"kind": "speed_change", "factor": 0.5, "seed": 3, "name": "slow"},
                {"kind": "insert_clip", "duration_seconds": 1, "position": "start", "donor": {"motion": "squat"}}]"#,
            &ctx(),
        )
        .unwrap();
        assert_eq!(
            s[0].perturbation,
            Perturbation::Zoom {
                scale: 2.0,
                center: [0.5, 0.5]
            }
        );
        assert_eq!(s[0].seed, 7);
        assert_eq!(s[0].name, "zoom x2");
        assert_eq!((s[1].name.as_str(), s[1].seed), ("slow", 3));
        match &s[2].perturbation {
            Perturbation::InsertClip { donor, .. } => assert_eq!(donor.len(), 25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_name_the_entry() {
        let cases = [
            (
                r#"{"scenarios": [{"kind": "identity"}, {"kind": "teleport"}]}"#,
                1,
            ),
            (r#"[{"kind": "zoom"}]"#, 0),
            (
                r#"[{"kind": "identity"}, {"kind": "identity"}, {"kind": "flip_horizontal", "scale": 1}]"#,
                2,
            ),
            (
                r#"[{"kind": "insert_noise", "duration_seconds": 1, "position": "top"}]"#,
                0,
            ),
            (
                r#"[{"kind": "insert_clip", "duration_seconds": 1, "position": "end", "donor": {"motion": "jig"}}]"#,
                0,
            ),
            (r#"[{"kind": "identity", "seed": -1}]"#, 0),
            (r#"[3]"#, 0),
        ];
        for (text, index) in cases {
            match parse_scenarios(text, &ctx()) {
                Err(ScenarioFileError::Entry { index: got, .. }) => {
                    assert_eq!(got, index, "{text}")
                }
                other => panic!("{text}: {other:?}"),
            }
        }
        let err =
            parse_scenarios(r#"[{"kind": "identity"}, {"kind": "teleport"}]"#, &ctx()).unwrap_err();
        assert!(err.to_string().contains("scenario entry 1"), "{err}");
        assert!(err.to_string().contains("teleport"), "{err}");
        assert!(matches!(
            parse_scenarios("{}", &ctx()),
            Err(ScenarioFileError::Json { .. })
        ));
    }
}
