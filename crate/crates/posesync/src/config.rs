//! Metric configuration files.
//!
//! ```text
//! {
//!   "metric": "angle-mae",              // or "keypoint-mae"
//!   "confidence_threshold": 0.1,
//!   "normalization": "bounding_box",    // keypoint-mae only; or "none"
//!   "joints": [                         // replaces the standard nine joints
//!     {"name": "left_knee_joint", "a": "left_hip", "pivot": "left_knee", "c": "left_ankle"}
//!   ],
//!   "joint_weights": [1, 1, 2, ...],    // or {"left_knee_joint": 2}
//!   "keypoint_weights": [1, 1, ...]     // 17 numbers, or {"nose": 0}
//! }
//! ```
//!
//! Every field is optional. Array weights must match the joint (or keypoint)
//! count; map weights override individual entries by name.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use posealign_core::{
    JointSet, JointTriplet, KeypointName, MetricConfig, MetricError, MetricKind, Normalization,
    KEYPOINT_COUNT,
};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum MetricName {
    #[serde(rename = "angle-mae", alias = "angle_mae")]
    AngleMae,
    #[serde(rename = "keypoint-mae", alias = "keypoint_mae")]
    KeypointMae,
}

impl MetricName {
    pub fn base_config(self) -> MetricConfig {
        match self {
            MetricName::AngleMae => MetricConfig::angle_mae(),
            MetricName::KeypointMae => MetricConfig::keypoint_mae(Normalization::BoundingBox),
        }
    }

    fn kind(self) -> MetricKind {
        match self {
            MetricName::AngleMae => MetricKind::AngleMae,
            MetricName::KeypointMae => MetricKind::KeypointMae,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum NormalizationDoc {
    None,
    BoundingBox,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    name: String,
    a: String,
    pivot: String,
    c: String,
    #[serde(default = "one")]
    weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Weights {
    List(Vec<f64>),
    ByName(BTreeMap<String, f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    metric: Option<MetricName>,
    confidence_threshold: Option<f64>,
    normalization: Option<NormalizationDoc>,
    joints: Option<Vec<JointDoc>>,
    joint_weights: Option<Weights>,
    keypoint_weights: Option<Weights>,
}

fn keypoint(name: &str) -> Result<KeypointName, String> {
    name.parse().map_err(|e| format!("{e}"))
}

fn metric_err(e: MetricError) -> String {
    e.to_string()
}

/// Builds a metric configuration from a config document.
///
/// `metric` is the metric chosen on the command line, if any; it must agree
/// with the file's `metric` field when both are present.
pub fn parse_metric_config(text: &str, metric: Option<MetricName>) -> Result<MetricConfig, String> {
    let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let name = match (metric, doc.metric) {
        (Some(a), Some(b)) if a != b => {
            return Err(format!("file selects {b:?} but {a:?} was requested"));
        }
        (a, b) => a.or(b).unwrap_or(MetricName::AngleMae),
    };
    let mut cfg = name.base_config();
    cfg.kind = name.kind();
    if let Some(t) = doc.confidence_threshold {
        cfg.confidence_threshold = t;
    }
    if let Some(n) = doc.normalization {
        cfg.normalization = match n {
            NormalizationDoc::None => Normalization::None,
            NormalizationDoc::BoundingBox => Normalization::BoundingBox,
        };
    }
    if let Some(joints) = doc.joints {
        let mut triplets = Vec::with_capacity(joints.len());
        let mut weights = Vec::with_capacity(joints.len());
        for j in joints {
            let t = JointTriplet::new(
                j.name,
                keypoint(&j.a)?,
                keypoint(&j.pivot)?,
                keypoint(&j.c)?,
            )
            .map_err(metric_err)?;
            triplets.push(t);
            weights.push(j.weight);
        }
        cfg.joint_set = JointSet::new(triplets, weights).map_err(metric_err)?;
    }
    match doc.joint_weights {
        None => {}
        Some(Weights::List(w)) => {
            cfg.joint_set = cfg.joint_set.with_weights(w).map_err(metric_err)?;
        }
        Some(Weights::ByName(map)) => {
            let mut w = cfg.joint_set.weights().to_vec();
            for (name, value) in map {
                let k = cfg
                    .joint_set
                    .position(&name)
                    .ok_or_else(|| format!("unknown joint `{name}` in joint_weights"))?;
                w[k] = value;
            }
            cfg.joint_set = cfg.joint_set.with_weights(w).map_err(metric_err)?;
        }
    }
    match doc.keypoint_weights {
        None => {}
        Some(Weights::List(w)) => {
            cfg.keypoint_weights =
                <[f64; KEYPOINT_COUNT]>::try_from(w.as_slice()).map_err(|_| {
                    format!(
                        "keypoint_weights needs {KEYPOINT_COUNT} entries, found {}",
                        w.len()
                    )
                })?;
        }
        Some(Weights::ByName(map)) => {
            for (name, value) in map {
                cfg.keypoint_weights[keypoint(&name)?.index()] = value;
            }
        }
    }
    cfg.validate().map_err(metric_err)?;
    Ok(cfg)
}

pub fn load_metric_config(
    path: impl AsRef<Path>,
    metric: Option<MetricName>,
) -> Result<MetricConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_metric_config(&text, metric).map_err(|message| ConfigError::Invalid {
        path: path.to_owned(),
        message,
    })
}
