//! JSON keypoint-sequence files.
//!
//! ```text
//! {
//!   "format_version": "1.0",
//!   "fps": 25.0,
//!   "source": "...",
//!   "keypoint_order": ["nose", ..., "right_ankle"],
//!   "frames": [
//!     [[x, y, confidence], ... 17 triples ...],
//!     ...
//!   ]
//! }
//! ```
//!
//! `keypoint_order` must list the 17 canonical names in canonical order.
//! Numbers are written in shortest round-trip form, so a save/load cycle
//! reproduces every value exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use posealign_core::{
    validate_sequence, Keypoint, KeypointName, PoseFrame, PoseSequence, Violation, KEYPOINT_COUNT,
};
use serde_json::{Map, Value};

/// A structural or invariant violation in a sequence document.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{message}", frame.map(|f| format!("frame {f}: ")).unwrap_or_default())]
pub struct SchemaError {
    pub frame: Option<usize>,
    pub message: String,
}

impl SchemaError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            frame: None,
            message: message.into(),
        }
    }

    fn at(frame: usize, message: impl Into<String>) -> Self {
        Self {
            frame: Some(frame),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: invalid JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Schema { path: PathBuf, source: SchemaError },
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value, SchemaError> {
    obj.get(name)
        .ok_or_else(|| SchemaError::new(format!("missing field `{name}`")))
}

fn parse_frame(index: usize, value: &Value) -> Result<PoseFrame, SchemaError> {
    let points = value
        .as_array()
        .ok_or_else(|| SchemaError::at(index, "frame must be an array of keypoints"))?;
    if points.len() != KEYPOINT_COUNT {
        return Err(SchemaError::at(
            index,
            format!(
                "expected {KEYPOINT_COUNT} keypoints, found {}",
                points.len()
            ),
        ));
    }
    let mut frame = PoseFrame::default();
    for ((name, slot), point) in KeypointName::ALL
        .iter()
        .zip(frame.keypoints.iter_mut())
        .zip(points)
    {
        let triple: Option<Vec<f64>> = point
            .as_array()
            .filter(|a| a.len() == 3)
            .and_then(|a| a.iter().map(Value::as_f64).collect());
        let [x, y, c] = triple
            .as_deref()
            .and_then(|t| <[f64; 3]>::try_from(t).ok())
            .ok_or_else(|| {
                SchemaError::at(index, format!("{name}: expected [x, y, confidence]"))
            })?;
        *slot = Keypoint::new(x, y, c);
    }
    Ok(frame)
}

/// Parses and validates a sequence document.
pub fn parse_sequence(text: &str) -> Result<PoseSequence, ParseError> {
    let value: Value = serde_json::from_str(text)?;
    Ok(sequence_from_value(&value)?)
}

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

pub fn sequence_from_value(value: &Value) -> Result<PoseSequence, SchemaError> {
    let obj = value
        .as_object()
        .ok_or_else(|| SchemaError::new("top level must be an object"))?;
    let format_version = field(obj, "format_version")?
        .as_str()
        .ok_or_else(|| SchemaError::new("`format_version` must be a string"))?;
    let fps = field(obj, "fps")?
        .as_f64()
        .ok_or_else(|| SchemaError::new("`fps` must be a number"))?;
    let source = field(obj, "source")?
        .as_str()
        .ok_or_else(|| SchemaError::new("`source` must be a string"))?;
    let order = field(obj, "keypoint_order")?
        .as_array()
        .ok_or_else(|| SchemaError::new("`keypoint_order` must be an array"))?;
    let canonical = KeypointName::names();
    if order.len() != KEYPOINT_COUNT
        || order
            .iter()
            .zip(canonical)
            .any(|(v, n)| v.as_str() != Some(n))
    {
        return Err(SchemaError::new(
            "`keypoint_order` must list the 17 canonical keypoint names in order",
        ));
    }
    let frames = field(obj, "frames")?
        .as_array()
        .ok_or_else(|| SchemaError::new("`frames` must be an array"))?
        .iter()
        .enumerate()
        .map(|(i, v)| parse_frame(i, v))
        .collect::<Result<Vec<_>, _>>()?;

    let seq = PoseSequence {
        frames,
        fps,
        source: source.to_owned(),
        format_version: format_version.to_owned(),
    };
    match validate_sequence(&seq).into_iter().next() {
        None => Ok(seq),
        Some(v) => Err(violation_error(&v)),
    }
}

fn violation_error(v: &Violation) -> SchemaError {
    SchemaError {
        frame: v.frame,
        message: match v.keypoint {
            Some(k) => format!("{k}: {}", v.rule),
            None => v.rule.to_string(),
        },
    }
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<PoseSequence, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_sequence(&text).map_err(|e| match e {
        ParseError::Json(source) => FormatError::Json {
            path: path.to_owned(),
            source,
        },
        ParseError::Schema(source) => FormatError::Schema {
            path: path.to_owned(),
            source,
        },
    })
}

fn number(v: f64) -> String {
    serde_json::to_string(&v).expect("finite numbers serialize")
}

/// Serializes a valid sequence; invalid sequences are refused so that no
/// file is written that the loader would reject.
pub fn sequence_to_string(seq: &PoseSequence) -> Result<String, SchemaError> {
    if let Some(v) = validate_sequence(seq).into_iter().next() {
        return Err(violation_error(&v));
    }
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(
        out,
        "  \"format_version\": {},",
        Value::from(seq.format_version.as_str())
    );
    let _ = writeln!(out, "  \"fps\": {},", number(seq.fps));
    let _ = writeln!(out, "  \"source\": {},", Value::from(seq.source.as_str()));
    let _ = writeln!(
        out,
        "  \"keypoint_order\": {},",
        serde_json::to_string(KeypointName::names()).expect("names serialize")
    );
    out.push_str("  \"frames\": [\n");
    for (i, frame) in seq.frames.iter().enumerate() {
        out.push_str("    [");
        for (k, kp) in frame.keypoints.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            let _ = write!(
                out,
                "[{}, {}, {}]",
                number(kp.x),
                number(kp.y),
                number(kp.confidence)
            );
        }
        out.push(']');
        if i + 1 < seq.frames.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    Ok(out)
}

pub fn save_sequence(seq: &PoseSequence, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    let text = sequence_to_string(seq).map_err(|source| FormatError::Schema {
        path: path.to_owned(),
        source,
    })?;
    fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_owned(),
        source,
    })
}
