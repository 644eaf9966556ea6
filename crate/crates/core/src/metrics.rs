//! Frame-to-frame pose costs.
//!
//! The default cost is the weighted mean absolute difference of nine joint
//! angles. Each angle is measured at a pivot keypoint between two limbs, so
//! the cost does not change when either pose is rotated, scaled or shifted as
//! a whole. A plain keypoint-distance cost is provided for comparison.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::keypoint::{KeypointName, PoseFrame, KEYPOINT_COUNT};

/// Vectors shorter than this make an angle undefined.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Bounding boxes with a smaller diagonal cannot be normalized.
pub const DEGENERATE_DIAGONAL: f64 = 1e-9;

pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("no joint angle is valid in both frames")]
    NoValidJoints,
    #[error("no keypoint is valid in both frames")]
    NoValidKeypoints,
    #[error("pose bounding box is degenerate (diagonal {0:e})")]
    DegenerateBoundingBox(f64),
    #[error("joint `{0}` uses its pivot as an end point")]
    DegenerateTriplet(String),
    #[error("weights must be finite and non-negative with a positive sum")]
    InvalidWeights,
    #[error("joint set needs one weight per triplet ({triplets} triplets, {weights} weights)")]
    WeightCountMismatch { triplets: usize, weights: usize },
    #[error("joint set is empty")]
    EmptyJointSet,
    #[error("confidence threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

impl MetricError {
    /// True for errors that only say the two frames cannot be compared.
    pub fn is_incomparable(&self) -> bool {
        matches!(
            self,
            MetricError::NoValidJoints
                | MetricError::NoValidKeypoints
                | MetricError::DegenerateBoundingBox(_)
        )
    }
}

/// Unsigned angle at `pivot` between the rays towards `a` and `c`, in `[0, π]`.
///
/// Returns `None` when either ray is shorter than [`DEGENERATE_NORM`].
pub fn angle_at_pivot(a: [f64; 2], pivot: [f64; 2], c: [f64; 2]) -> Option<f64> {
    let u = [a[0] - pivot[0], a[1] - pivot[1]];
    let v = [c[0] - pivot[0], c[1] - pivot[1]];
    if libm::hypot(u[0], u[1]) < DEGENERATE_NORM || libm::hypot(v[0], v[1]) < DEGENERATE_NORM {
        return None;
    }
    let cross = u[0] * v[1] - u[1] * v[0];
    let dot = u[0] * v[0] + u[1] * v[1];
    Some(libm::atan2(libm::fabs(cross), dot))
}

/// Three keypoints with the angle measured at `pivot`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTriplet {
    name: String,
    a: KeypointName,
    pivot: KeypointName,
    c: KeypointName,
}

impl JointTriplet {
    pub fn new(
        name: impl Into<String>,
        a: KeypointName,
        pivot: KeypointName,
        c: KeypointName,
    ) -> Result<Self, MetricError> {
        let name = name.into();
        if a == pivot || c == pivot {
            return Err(MetricError::DegenerateTriplet(name));
        }
        Ok(Self { name, a, pivot, c })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> (KeypointName, KeypointName, KeypointName) {
        (self.a, self.pivot, self.c)
    }
}

/// Weighted list of joint triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSet {
    triplets: Vec<JointTriplet>,
    weights: Vec<f64>,
}

fn check_weights(weights: &[f64]) -> Result<(), MetricError> {
    let ok =
        weights.iter().all(|w| w.is_finite() && *w >= 0.0) && weights.iter().sum::<f64>() > 0.0;
    if ok {
        Ok(())
    } else {
        Err(MetricError::InvalidWeights)
    }
}

impl JointSet {
    pub fn new(triplets: Vec<JointTriplet>, weights: Vec<f64>) -> Result<Self, MetricError> {
        if triplets.is_empty() {
            return Err(MetricError::EmptyJointSet);
        }
        if triplets.len() != weights.len() {
            return Err(MetricError::WeightCountMismatch {
                triplets: triplets.len(),
                weights: weights.len(),
            });
        }
        check_weights(&weights)?;
        Ok(Self { triplets, weights })
    }

    /// The nine shoulder, elbow, hip, knee and waist joints, equally weighted.
    ///
    /// The left shoulder is measured between hip and elbow, mirroring the
    /// right shoulder.
    pub fn standard() -> Self {
        use KeypointName::*;
        let table = [
            ("left_shoulder_joint", LeftHip, LeftShoulder, LeftElbow),
            ("right_shoulder_joint", RightHip, RightShoulder, RightElbow),
            ("right_elbow_joint", RightShoulder, RightElbow, RightWrist),
            ("left_elbow_joint", LeftShoulder, LeftElbow, LeftWrist),
            ("right_hip_joint", LeftHip, RightHip, RightKnee),
            ("left_hip_joint", RightHip, LeftHip, LeftKnee),
            ("right_knee_joint", RightHip, RightKnee, RightAnkle),
            ("left_knee_joint", LeftHip, LeftKnee, LeftAnkle),
            ("waist_joint", LeftShoulder, LeftHip, LeftKnee),
        ];
        let triplets = table
            .iter()
            .map(|&(name, a, p, c)| JointTriplet::new(name, a, p, c).expect("standard joints"))
            .collect::<Vec<_>>();
        let weights = alloc::vec![1.0; triplets.len()];
        Self { triplets, weights }
    }

    pub fn triplets(&self) -> &[JointTriplet] {
        &self.triplets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.triplets.iter().position(|t| t.name == name)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self, MetricError> {
        Self::new(self.triplets.clone(), weights)
    }
}

impl Default for JointSet {
    fn default() -> Self {
        Self::standard()
    }
}

/// Joint angles of one frame, in [`JointSet`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAngleVector {
    pub angles: Vec<f64>,
    /// `false` where the angle is undefined or a keypoint is below the
    /// confidence threshold. The matching entry in `angles` is then `NaN`.
    pub valid: Vec<bool>,
}

impl JointAngleVector {
    pub fn get(&self, i: usize) -> Option<f64> {
        self.valid[i].then(|| self.angles[i])
    }
}

pub fn frame_angles(
    frame: &PoseFrame,
    joint_set: &JointSet,
    confidence_threshold: f64,
) -> JointAngleVector {
    let n = joint_set.len();
    let mut angles = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for t in &joint_set.triplets {
        let (a, p, c) = (frame.get(t.a), frame.get(t.pivot), frame.get(t.c));
        let confident = [a, p, c]
            .iter()
            .all(|k| k.confidence >= confidence_threshold);
        let angle = if confident {
            angle_at_pivot(a.position(), p.position(), c.position())
        } else {
            None
        };
        valid.push(angle.is_some());
        angles.push(angle.unwrap_or(f64::NAN));
    }
    JointAngleVector { angles, valid }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    #[default]
    AngleMae,
    KeypointMae,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    None,
    BoundingBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    pub kind: MetricKind,
    pub joint_set: JointSet,
    pub keypoint_weights: [f64; KEYPOINT_COUNT],
    pub confidence_threshold: f64,
    /// Only used by the keypoint cost.
    pub normalization: Normalization,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self::angle_mae()
    }
}

impl MetricConfig {
    pub fn angle_mae() -> Self {
        Self {
            kind: MetricKind::AngleMae,
            joint_set: JointSet::standard(),
            keypoint_weights: [1.0; KEYPOINT_COUNT],
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            normalization: Normalization::None,
        }
    }

    pub fn keypoint_mae(normalization: Normalization) -> Self {
        Self {
            kind: MetricKind::KeypointMae,
            normalization,
            ..Self::angle_mae()
        }
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(MetricError::InvalidThreshold(self.confidence_threshold));
        }
        check_weights(&self.keypoint_weights)?;
        check_weights(&self.joint_set.weights)
    }

    /// Width of the cost's value range, used to price incomparable pairs.
    ///
    /// Angle costs lie in `[0, π]`. Box-normalized keypoints are at most one
    /// diagonal apart; raw normalized coordinates at most `√2`.
    pub fn range(&self) -> f64 {
        match (self.kind, self.normalization) {
            (MetricKind::AngleMae, _) => PI,
            (MetricKind::KeypointMae, Normalization::BoundingBox) => 1.0,
            (MetricKind::KeypointMae, Normalization::None) => core::f64::consts::SQRT_2,
        }
    }
}

/// Per-frame data a cost needs, computed once per frame.
#[derive(Debug, Clone)]
pub(crate) enum Prepared {
    Angles(JointAngleVector),
    Points(Box<Result<[Option<[f64; 2]>; KEYPOINT_COUNT], MetricError>>),
}

pub(crate) fn prepare(frame: &PoseFrame, config: &MetricConfig) -> Prepared {
    match config.kind {
        MetricKind::AngleMae => Prepared::Angles(frame_angles(
            frame,
            &config.joint_set,
            config.confidence_threshold,
        )),
        MetricKind::KeypointMae => Prepared::Points(Box::new(prepare_points(frame, config))),
    }
}

fn prepare_points(
    frame: &PoseFrame,
    config: &MetricConfig,
) -> Result<[Option<[f64; 2]>; KEYPOINT_COUNT], MetricError> {
    let mut pts = [None; KEYPOINT_COUNT];
    for (slot, kp) in pts.iter_mut().zip(frame.keypoints.iter()) {
        if kp.confidence >= config.confidence_threshold {
            *slot = Some(kp.position());
        }
    }
    if config.normalization == Normalization::BoundingBox {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in pts.iter().flatten() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if lo[0] > hi[0] {
            return Err(MetricError::NoValidKeypoints);
        }
        let diag = libm::hypot(hi[0] - lo[0], hi[1] - lo[1]);
        if diag < DEGENERATE_DIAGONAL {
            return Err(MetricError::DegenerateBoundingBox(diag));
        }
        for p in pts.iter_mut().flatten() {
            *p = [(p[0] - lo[0]) / diag, (p[1] - lo[1]) / diag];
        }
    }
    Ok(pts)
}

fn weighted_mean(
    terms: impl Iterator<Item = (f64, f64)>,
    empty: MetricError,
) -> Result<f64, MetricError> {
    let (mut num, mut den) = (0.0, 0.0);
    for (w, v) in terms {
        num += w * v;
        den += w;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(empty)
    }
}

pub(crate) fn compare(
    a: &Prepared,
    b: &Prepared,
    config: &MetricConfig,
) -> Result<f64, MetricError> {
    match (a, b) {
        (Prepared::Angles(va), Prepared::Angles(vb)) => weighted_mean(
            config
                .joint_set
                .weights
                .iter()
                .enumerate()
                .filter_map(|(i, &w)| Some((w, libm::fabs(va.get(i)? - vb.get(i)?)))),
            MetricError::NoValidJoints,
        ),
        (Prepared::Points(pa), Prepared::Points(pb)) => {
            let (pa, pb) = (
                (**pa).as_ref().map_err(Clone::clone)?,
                (**pb).as_ref().map_err(Clone::clone)?,
            );
            weighted_mean(
                config
                    .keypoint_weights
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &w)| {
                        let (p, q) = (pa[k]?, pb[k]?);
                        Some((w, libm::hypot(p[0] - q[0], p[1] - q[1])))
                    }),
                MetricError::NoValidKeypoints,
            )
        }
        _ => unreachable!("frames prepared under different metric kinds"),
    }
}

/// Weighted mean absolute joint-angle difference over joints valid in both
/// frames, in radians. Weights are renormalized over that subset.
pub fn angle_mae(a: &PoseFrame, b: &PoseFrame, config: &MetricConfig) -> Result<f64, MetricError> {
    let cfg = MetricConfig {
        kind: MetricKind::AngleMae,
        ..config.clone()
    };
    compare(&prepare(a, &cfg), &prepare(b, &cfg), &cfg)
}

/// Weighted mean Euclidean distance between corresponding keypoints valid in
/// both frames, optionally after mapping each frame into its own bounding box.
pub fn keypoint_mae(
    a: &PoseFrame,
    b: &PoseFrame,
    config: &MetricConfig,
) -> Result<f64, MetricError> {
    let cfg = MetricConfig {
        kind: MetricKind::KeypointMae,
        ..config.clone()
    };
    compare(&prepare(a, &cfg), &prepare(b, &cfg), &cfg)
}

/// The cost selected by `config.kind`.
pub fn frame_cost(a: &PoseFrame, b: &PoseFrame, config: &MetricConfig) -> Result<f64, MetricError> {
    compare(&prepare(a, config), &prepare(b, config), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn angle_at_pivot_cases() {
        let o = [0.0, 0.0];
        assert!((angle_at_pivot([0.0, 1.0], o, [1.0, 0.0]).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(angle_at_pivot([1.0, 0.0], o, [2.0, 0.0]).unwrap(), 0.0);
        assert!((angle_at_pivot([-1.0, 0.0], o, [1.0, 0.0]).unwrap() - PI).abs() < 1e-15);
        assert_eq!(angle_at_pivot(o, o, [1.0, 0.0]), None);
        assert_eq!(angle_at_pivot([1.0, 0.0], o, [1e-13, 0.0]), None);
    }

    #[test]
    fn degenerate_triplet_rejected() {
        use KeypointName::*;
        assert!(matches!(
            JointTriplet::new("bad", LeftShoulder, LeftShoulder, LeftElbow),
            Err(MetricError::DegenerateTriplet(_))
        ));
        assert!(JointTriplet::new("ok", LeftHip, LeftShoulder, LeftElbow).is_ok());
    }

    #[test]
    fn standard_set_shape() {
        let js = JointSet::standard();
        assert_eq!(js.len(), 9);
        assert_eq!(js.weights(), &[1.0; 9]);
        let (a, p, c) = js.triplets()[0].points();
        assert_eq!(
            (a, p, c),
            (
                KeypointName::LeftHip,
                KeypointName::LeftShoulder,
                KeypointName::LeftElbow
            )
        );
        assert_eq!(js.position("waist_joint"), Some(8));
    }

    #[test]
    fn joint_set_weight_rules() {
        let js = JointSet::standard();
        assert_eq!(
            js.with_weights(alloc::vec![0.0; 9]),
            Err(MetricError::InvalidWeights)
        );
        assert_eq!(
            js.with_weights(alloc::vec![1.0; 8]),
            Err(MetricError::WeightCountMismatch {
                triplets: 9,
                weights: 8
            })
        );
        let mut w = alloc::vec![1.0; 9];
        w[3] = -1.0;
        assert_eq!(js.with_weights(w), Err(MetricError::InvalidWeights));
    }

    #[test]
    fn config_validation() {
        let mut cfg = MetricConfig::angle_mae();
        assert!(cfg.validate().is_ok());
        cfg.confidence_threshold = 1.2;
        assert_eq!(cfg.validate(), Err(MetricError::InvalidThreshold(1.2)));
        let mut cfg = MetricConfig::keypoint_mae(Normalization::None);
        cfg.keypoint_weights = [0.0; KEYPOINT_COUNT];
        assert_eq!(cfg.validate(), Err(MetricError::InvalidWeights));
    }
}
