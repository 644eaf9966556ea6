//! Synthetic skeleton animation.
//!
//! Produces deterministic 17-keypoint sequences from a small planar skeleton
//! driven by smooth joint trajectories. The drive signal is a slow chirp with
//! amplitude modulation, so no two cycles of a motion are identical; a seeded
//! low-amplitude jitter is added to every coordinate.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::keypoint::{Keypoint, KeypointName, PoseFrame, PoseSequence, KEYPOINT_COUNT};

const JITTER: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Motion {
    /// Both arms raised and lowered together, legs nearly still.
    ArmWave,
    /// Hips lowered and raised with knees and hips flexing together.
    Squat,
    /// Alternating leg and arm swing while drifting across the frame.
    WalkCycle,
}

impl Motion {
    pub const ALL: [Motion; 3] = [Motion::ArmWave, Motion::Squat, Motion::WalkCycle];

    pub fn as_str(self) -> &'static str {
        match self {
            Motion::ArmWave => "arm_wave",
            Motion::Squat => "squat",
            Motion::WalkCycle => "walk_cycle",
        }
    }
}

impl fmt::Display for Motion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Motion {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Motion::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| SynthError::UnknownMotion(s.into()))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("unknown motion `{0}` (expected arm_wave, squat or walk_cycle)")]
    UnknownMotion(alloc::string::String),
    #[error("seconds and fps must be positive and finite (got {seconds} s at {fps} fps)")]
    InvalidTiming { seconds: f64, fps: f64 },
    #[error("{seconds} s at {fps} fps yields fewer than 2 frames")]
    TooShort { seconds: f64, fps: f64 },
}

/// Planar skeleton pose. Limb angles are measured from the trunk's downward
/// direction, positive towards the figure's left (image +x).
#[derive(Debug, Clone, Copy, Default)]
struct Skeleton {
    hip_centre: [f64; 2],
    lean: f64,
    left_arm: f64,
    right_arm: f64,
    left_elbow: f64,
    right_elbow: f64,
    left_thigh: f64,
    right_thigh: f64,
    left_knee: f64,
    right_knee: f64,
}

const TORSO: f64 = 0.22;
const SHOULDER_HALF: f64 = 0.08;
const HIP_HALF: f64 = 0.05;
const UPPER_ARM: f64 = 0.11;
const FOREARM: f64 = 0.10;
const THIGH: f64 = 0.13;
const SHIN: f64 = 0.13;
const NECK_TO_NOSE: f64 = 0.09;

fn dir(theta: f64) -> [f64; 2] {
    [libm::sin(theta), libm::cos(theta)]
}

fn add(p: [f64; 2], d: [f64; 2], len: f64) -> [f64; 2] {
    [p[0] + d[0] * len, p[1] + d[1] * len]
}

impl Skeleton {
    fn keypoints(&self) -> [[f64; 2]; KEYPOINT_COUNT] {
        use KeypointName::*;
        let down = dir(self.lean);
        let up = [-down[0], -down[1]];
        // Perpendicular pointing to the figure's left.
        let side = [down[1], -down[0]];
        let hip = self.hip_centre;
        let neck = add(hip, up, TORSO);

        let mut out = [[0.0; 2]; KEYPOINT_COUNT];
        let mut put = |k: KeypointName, p: [f64; 2]| out[k.index()] = p;

        let nose = add(neck, up, NECK_TO_NOSE);
        put(Nose, nose);
        put(LeftEye, add(add(nose, up, 0.015), side, 0.02));
        put(RightEye, add(add(nose, up, 0.015), side, -0.02));
        put(LeftEar, add(add(nose, up, 0.005), side, 0.04));
        put(RightEar, add(add(nose, up, 0.005), side, -0.04));

        for (s, arm, elbow, thigh, knee, names) in [
            (
                1.0,
                self.left_arm,
                self.left_elbow,
                self.left_thigh,
                self.left_knee,
                [
                    LeftShoulder,
                    LeftElbow,
                    LeftWrist,
                    LeftHip,
                    LeftKnee,
                    LeftAnkle,
                ],
            ),
            (
                -1.0,
                self.right_arm,
                self.right_elbow,
                self.right_thigh,
                self.right_knee,
                [
                    RightShoulder,
                    RightElbow,
                    RightWrist,
                    RightHip,
                    RightKnee,
                    RightAnkle,
                ],
            ),
        ] {
            let shoulder = add(neck, side, s * SHOULDER_HALF);
            let arm_theta = self.lean + arm;
            let elbow_pt = add(shoulder, dir(arm_theta), UPPER_ARM);
            let wrist = add(elbow_pt, dir(arm_theta + s * elbow), FOREARM);
            let hip_pt = add(hip, side, s * HIP_HALF);
            let thigh_theta = self.lean + thigh;
            let knee_pt = add(hip_pt, dir(thigh_theta), THIGH);
            let ankle = add(knee_pt, dir(thigh_theta - s * knee), SHIN);
            for (k, p) in names
                .into_iter()
                .zip([shoulder, elbow_pt, wrist, hip_pt, knee_pt, ankle])
            {
                put(k, p);
            }
        }
        out
    }
}

/// Per-sequence variation drawn from the seed.
struct Drive {
    freq: f64,
    chirp: f64,
    phase: f64,
    am_freq: f64,
    am_phase: f64,
    drift_phase: f64,
}

impl Drive {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        Self {
            freq: rng.gen_range(0.4..0.6),
            chirp: rng.gen_range(0.02..0.05),
            phase: rng.gen_range(0.0..TAU),
            am_freq: rng.gen_range(0.05..0.1),
            am_phase: rng.gen_range(0.0..TAU),
            drift_phase: rng.gen_range(0.0..TAU),
        }
    }

    fn phase(&self, t: f64) -> f64 {
        TAU * (self.freq * t + self.chirp * t * t) + self.phase
    }

    fn amplitude(&self, t: f64) -> f64 {
        1.0 + 0.25 * libm::sin(TAU * self.am_freq * t + self.am_phase)
    }

    /// Slow background sway, distinct from the main cycle.
    fn drift(&self, t: f64) -> f64 {
        libm::sin(0.8 * t + self.drift_phase)
    }
}

fn skeleton_at(motion: Motion, drive: &Drive, t: f64) -> Skeleton {
    let ph = drive.phase(t);
    let amp = drive.amplitude(t);
    let drift = drive.drift(t);
    // Cycle position in [0, 1].
    let lift = 0.5 * (1.0 - libm::cos(ph));
    match motion {
        Motion::ArmWave => {
            let arm = 0.35 + 2.1 * (lift * amp).min(1.2);
            let elbow = 0.15 + 0.5 * (0.5 + 0.5 * libm::sin(ph + 0.7));
            let thigh = 0.12 + 0.04 * drift;
            let knee = 0.08 + 0.06 * (0.5 + 0.5 * drift);
            Skeleton {
                hip_centre: [0.5, 0.58],
                lean: 0.03 * drift,
                left_arm: arm,
                right_arm: -arm,
                left_elbow: elbow,
                right_elbow: elbow,
                left_thigh: thigh,
                right_thigh: -thigh,
                left_knee: knee,
                right_knee: knee,
            }
        }
        Motion::Squat => {
            let depth = (lift * amp).min(1.15);
            let thigh = 0.15 + 0.9 * depth;
            let knee = 0.1 + 1.6 * depth;
            let arm = 0.3 + 1.1 * depth + 0.1 * drift;
            Skeleton {
                hip_centre: [0.5, 0.55 + 0.09 * depth],
                lean: 0.25 * depth + 0.03 * drift,
                left_arm: arm,
                right_arm: -arm,
                left_elbow: 0.2 + 0.15 * drift,
                right_elbow: 0.2 + 0.15 * drift,
                left_thigh: thigh,
                right_thigh: -thigh,
                left_knee: knee,
                right_knee: knee,
            }
        }
        Motion::WalkCycle => {
            let swing = 0.45 * amp * libm::sin(ph);
            let lift_l = libm::fmax(0.0, libm::sin(ph + 0.9));
            let lift_r = libm::fmax(0.0, libm::sin(ph + 0.9 + PI));
            Skeleton {
                hip_centre: [0.3 + 0.04 * t + 0.02 * drift, 0.56],
                lean: 0.05 + 0.03 * drift,
                left_arm: 0.15 - 0.6 * swing,
                right_arm: -0.15 - 0.6 * swing,
                left_elbow: 0.3 + 0.2 * lift_r,
                right_elbow: 0.3 + 0.2 * lift_l,
                left_thigh: 0.08 + swing,
                right_thigh: -0.08 - swing,
                left_knee: 0.1 + 0.8 * lift_l,
                right_knee: 0.1 + 0.8 * lift_r,
            }
        }
    }
}

/// Number of frames `seconds` of video at `fps` yields.
pub fn frame_count(seconds: f64, fps: f64) -> usize {
    libm::round(seconds * fps) as usize
}

/// Deterministic synthetic sequence; all confidences are 1.
pub fn synth_sequence(
    motion: Motion,
    seconds: f64,
    fps: f64,
    seed: u64,
) -> Result<PoseSequence, SynthError> {
    if !(seconds.is_finite() && fps.is_finite() && seconds > 0.0 && fps > 0.0) {
        return Err(SynthError::InvalidTiming { seconds, fps });
    }
    if seconds * fps < 2.0 {
        return Err(SynthError::TooShort { seconds, fps });
    }
    let n = frame_count(seconds, fps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drive = Drive::new(&mut rng);
    let frames: Vec<PoseFrame> = (0..n)
        .map(|k| {
            let pts = skeleton_at(motion, &drive, k as f64 / fps).keypoints();
            let mut frame = PoseFrame::default();
            for (kp, p) in frame.keypoints.iter_mut().zip(pts) {
                *kp = Keypoint::new(
                    p[0] + rng.gen_range(-JITTER..JITTER),
                    p[1] + rng.gen_range(-JITTER..JITTER),
                    1.0,
                );
            }
            frame
        })
        .collect();
    Ok(PoseSequence::new(
        frames,
        fps,
        format!("synthetic:{motion}:{seconds}s@{fps}fps:seed={seed}"),
    )
    .expect("synthetic frames are finite"))
}

/// A pose with every keypoint placed uniformly at random in the unit square.
pub fn random_pose(rng: &mut impl Rng) -> PoseFrame {
    let mut frame = PoseFrame::default();
    for kp in frame.keypoints.iter_mut() {
        *kp = Keypoint::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 1.0);
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_counts_and_determinism() {
        let a = synth_sequence(Motion::ArmWave, 1.0, 25.0, 7).unwrap();
        let b = synth_sequence(Motion::ArmWave, 1.0, 25.0, 7).unwrap();
        assert_eq!(a.len(), 25);
        assert_eq!(a, b);
        assert_ne!(a, synth_sequence(Motion::ArmWave, 1.0, 25.0, 8).unwrap());
        assert_eq!(
            synth_sequence(Motion::Squat, 2.0, 10.0, 0).unwrap().len(),
            20
        );
    }

    #[test]
    fn rejects_bad_timing() {
        assert!(matches!(
            synth_sequence(Motion::WalkCycle, 0.05, 25.0, 0),
            Err(SynthError::TooShort { .. })
        ));
        assert!(matches!(
            synth_sequence(Motion::WalkCycle, 1.0, 0.0, 0),
            Err(SynthError::InvalidTiming { .. })
        ));
        assert!(matches!(
            synth_sequence(Motion::WalkCycle, f64::NAN, 25.0, 0),
            Err(SynthError::InvalidTiming { .. })
        ));
    }

    #[test]
    fn motion_names_round_trip() {
        for m in Motion::ALL {
            assert_eq!(m.as_str().parse::<Motion>().unwrap(), m);
        }
        assert!("jump".parse::<Motion>().is_err());
    }
}
