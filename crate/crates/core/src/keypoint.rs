//! Pose data model: the 17-keypoint schema, frames and sequences.
//!
//! Coordinates are normalized image coordinates with `y` growing downward.
//! Values slightly outside `[0, 1]` are legal (detectors overshoot the frame
//! edge); only non-finite values are rejected.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub const KEYPOINT_COUNT: usize = 17;

/// Interchange format version written by this crate.
pub const FORMAT_VERSION: &str = "1.0";

/// Major format version this crate can read.
pub const SUPPORTED_MAJOR: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum KeypointName {
    Nose = 0,
    LeftEye = 1,
    RightEye = 2,
    LeftEar = 3,
    RightEar = 4,
    LeftShoulder = 5,
    RightShoulder = 6,
    LeftElbow = 7,
    RightElbow = 8,
    LeftWrist = 9,
    RightWrist = 10,
    LeftHip = 11,
    RightHip = 12,
    LeftKnee = 13,
    RightKnee = 14,
    LeftAnkle = 15,
    RightAnkle = 16,
}

impl KeypointName {
    /// All names in canonical order.
    pub const ALL: [KeypointName; KEYPOINT_COUNT] = [
        KeypointName::Nose,
        KeypointName::LeftEye,
        KeypointName::RightEye,
        KeypointName::LeftEar,
        KeypointName::RightEar,
        KeypointName::LeftShoulder,
        KeypointName::RightShoulder,
        KeypointName::LeftElbow,
        KeypointName::RightElbow,
        KeypointName::LeftWrist,
        KeypointName::RightWrist,
        KeypointName::LeftHip,
        KeypointName::RightHip,
        KeypointName::LeftKnee,
        KeypointName::RightKnee,
        KeypointName::LeftAnkle,
        KeypointName::RightAnkle,
    ];

    const NAMES: [&'static str; KEYPOINT_COUNT] = [
        "nose",
        "left_eye",
        "right_eye",
        "left_ear",
        "right_ear",
        "left_shoulder",
        "right_shoulder",
        "left_elbow",
        "right_elbow",
        "left_wrist",
        "right_wrist",
        "left_hip",
        "right_hip",
        "left_knee",
        "right_knee",
        "left_ankle",
        "right_ankle",
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        Self::NAMES[self.index()]
    }

    /// The anatomical counterpart on the other side of the body. Midline
    /// points (the nose) map to themselves.
    pub fn mirrored(self) -> Self {
        use KeypointName::*;
        match self {
            Nose => Nose,
            LeftEye => RightEye,
            RightEye => LeftEye,
            LeftEar => RightEar,
            RightEar => LeftEar,
            LeftShoulder => RightShoulder,
            RightShoulder => LeftShoulder,
            LeftElbow => RightElbow,
            RightElbow => LeftElbow,
            LeftWrist => RightWrist,
            RightWrist => LeftWrist,
            LeftHip => RightHip,
            RightHip => LeftHip,
            LeftKnee => RightKnee,
            RightKnee => LeftKnee,
            LeftAnkle => RightAnkle,
            RightAnkle => LeftAnkle,
        }
    }

    /// Canonical names, in order.
    pub fn names() -> &'static [&'static str; KEYPOINT_COUNT] {
        &Self::NAMES
    }
}

impl fmt::Display for KeypointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown keypoint name `{0}`")]
pub struct UnknownKeypoint(pub String);

impl FromStr for KeypointName {
    type Err = UnknownKeypoint;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::NAMES
            .iter()
            .position(|n| *n == s)
            .and_then(Self::from_index)
            .ok_or_else(|| UnknownKeypoint(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub const fn new(x: f64, y: f64, confidence: f64) -> Self {
        Self { x, y, confidence }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// One video frame's keypoints, indexed by [`KeypointName`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PoseFrame {
    pub keypoints: [Keypoint; KEYPOINT_COUNT],
}

impl PoseFrame {
    pub const fn new(keypoints: [Keypoint; KEYPOINT_COUNT]) -> Self {
        Self { keypoints }
    }

    pub fn get(&self, name: KeypointName) -> &Keypoint {
        &self.keypoints[name.index()]
    }

    pub fn get_mut(&mut self, name: KeypointName) -> &mut Keypoint {
        &mut self.keypoints[name.index()]
    }

    /// Applies `f` to every keypoint position, keeping confidences.
    pub fn map_positions(&self, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Self {
        let mut out = *self;
        for kp in out.keypoints.iter_mut() {
            let [x, y] = f(kp.position());
            kp.x = x;
            kp.y = y;
        }
        out
    }

    /// Mirrors the frame horizontally (`x -> 1 - x`) and swaps left/right
    /// labels, which is what a pose detector reports on a flipped video.
    pub fn flipped(&self) -> Self {
        let mut out = *self;
        for name in KeypointName::ALL {
            let src = self.get(name.mirrored());
            *out.get_mut(name) = Keypoint::new(1.0 - src.x, src.y, src.confidence);
        }
        out
    }
}

/// An ordered list of frames plus capture metadata.
///
/// Fields are public so that loaders can build a sequence from untrusted
/// input and run [`validate_sequence`] on it; [`PoseSequence::new`] is the
/// checked constructor.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    pub frames: Vec<PoseFrame>,
    pub fps: f64,
    pub source: String,
    pub format_version: String,
}

impl PoseSequence {
    pub fn new(
        frames: Vec<PoseFrame>,
        fps: f64,
        source: impl Into<String>,
    ) -> Result<Self, Violation> {
        let seq = Self {
            frames,
            fps,
            source: source.into(),
            format_version: FORMAT_VERSION.into(),
        };
        match validate_sequence(&seq).into_iter().next() {
            Some(v) => Err(v),
            None => Ok(seq),
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Same metadata, different frames.
    pub fn with_frames(&self, frames: Vec<PoseFrame>, source: impl Into<String>) -> Self {
        Self {
            frames,
            fps: self.fps,
            source: source.into(),
            format_version: self.format_version.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    X,
    Y,
    Confidence,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::X => "x",
            Field::Y => "y",
            Field::Confidence => "confidence",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationRule {
    EmptyFrames,
    NonPositiveFps(f64),
    UnsupportedFormatVersion(String),
    NonFinite(Field),
    ConfidenceOutOfRange(f64),
}

/// A broken invariant, located as precisely as the rule allows.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct Violation {
    pub frame: Option<usize>,
    pub keypoint: Option<KeypointName>,
    pub rule: ViolationRule,
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationRule::EmptyFrames => f.write_str("sequence has no frames"),
            ViolationRule::NonPositiveFps(v) => {
                write!(f, "fps must be positive and finite, got {v}")
            }
            ViolationRule::UnsupportedFormatVersion(v) => {
                write!(
                    f,
                    "unsupported format_version `{v}` (major {SUPPORTED_MAJOR} expected)"
                )
            }
            ViolationRule::NonFinite(field) => write!(f, "{field} is not finite"),
            ViolationRule::ConfidenceOutOfRange(c) => write!(f, "confidence {c} outside [0, 1]"),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(frame) = self.frame {
            write!(f, "frame {frame}")?;
            if let Some(kp) = self.keypoint {
                write!(f, ", {kp}")?;
            }
            f.write_str(": ")?;
        }
        write!(f, "{}", self.rule)
    }
}

fn version_major(version: &str) -> Option<u32> {
    let (major, minor) = version.split_once('.')?;
    minor.parse::<u32>().ok()?;
    major.parse().ok()
}

/// Checks every invariant of `seq`. An empty result means the sequence is valid.
pub fn validate_sequence(seq: &PoseSequence) -> Vec<Violation> {
    let mut out = Vec::new();
    let whole = |rule| Violation {
        frame: None,
        keypoint: None,
        rule,
    };
    if version_major(&seq.format_version) != Some(SUPPORTED_MAJOR) {
        out.push(whole(ViolationRule::UnsupportedFormatVersion(
            seq.format_version.clone(),
        )));
    }
    if !(seq.fps.is_finite() && seq.fps > 0.0) {
        out.push(whole(ViolationRule::NonPositiveFps(seq.fps)));
    }
    if seq.frames.is_empty() {
        out.push(whole(ViolationRule::EmptyFrames));
    }
    for (fi, frame) in seq.frames.iter().enumerate() {
        for (name, kp) in KeypointName::ALL.iter().zip(frame.keypoints.iter()) {
            let at = |rule| Violation {
                frame: Some(fi),
                keypoint: Some(*name),
                rule,
            };
            if !kp.x.is_finite() {
                out.push(at(ViolationRule::NonFinite(Field::X)));
            }
            if !kp.y.is_finite() {
                out.push(at(ViolationRule::NonFinite(Field::Y)));
            }
            if !kp.confidence.is_finite() {
                out.push(at(ViolationRule::NonFinite(Field::Confidence)));
            } else if !(0.0..=1.0).contains(&kp.confidence) {
                out.push(at(ViolationRule::ConfidenceOutOfRange(kp.confidence)));
            }
        }
    }
    out
}
