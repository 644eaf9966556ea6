//! Pose-based sequence synchronization.
//!
//! Two sequences of 17-keypoint human poses are compared frame by frame with a
//! joint-angle cost that is unchanged by rotating, scaling or shifting either
//! pose, and aligned in time with dynamic time warping. The [`eval`] module
//! generates perturbed copies of a sequence with a known frame correspondence
//! and scores how much of it an alignment recovers.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! files and the command line live in the `posealign` companion crate.
#![no_std]

extern crate alloc;

pub mod dtw;
pub mod eval;
pub mod keypoint;
pub mod metrics;
pub mod synth;

pub use dtw::{
    build_cost_matrix, dtw_align, dtw_align_banded, extract_mapping, AlignError, AlignmentResult,
    CostMatrix, PathViolation, RefMatch, WarpingPath,
};
pub use eval::{
    apply_perturbation, perturbed_len, run_scenario, run_scenario_suite, score_alignment,
    EvalError, EvalReport, GroundTruthMap, Perturbation, Position, Scenario, ScenarioOutcome,
};
pub use keypoint::{
    validate_sequence, Keypoint, KeypointName, PoseFrame, PoseSequence, Violation, ViolationRule,
    FORMAT_VERSION, KEYPOINT_COUNT,
};
pub use metrics::{
    angle_at_pivot, angle_mae, frame_angles, frame_cost, keypoint_mae, JointAngleVector, JointSet,
    JointTriplet, MetricConfig, MetricError, MetricKind, Normalization,
};
pub use synth::{random_pose, synth_sequence, Motion, SynthError};
