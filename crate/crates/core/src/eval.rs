//! Accuracy evaluation on perturbed copies of a sequence.
//!
//! A [`Perturbation`] turns a reference sequence into a test sequence and
//! records, for every reference frame, which test frame shows the same
//! content. After alignment, a reference frame counts as matched when its
//! representative test frame lies within a tolerance of that frame.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dtw::{build_cost_matrix, dtw_align, AlignError, AlignmentResult};
use crate::keypoint::{PoseFrame, PoseSequence};
use crate::metrics::MetricConfig;
use crate::synth::{frame_count, random_pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Start,
    Middle,
    End,
}

impl Position {
    /// Insertion index into a sequence of `len` frames.
    pub fn index(self, len: usize) -> usize {
        match self {
            Position::Start => 0,
            Position::Middle => len / 2,
            Position::End => len,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Start => "start",
            Position::Middle => "middle",
            Position::End => "end",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Perturbation {
    /// Test is an exact copy of the reference.
    Identity,
    /// Replays frames `[start_frac, end_frac)` of the source at `factor` times
    /// the original speed, with nearest-frame resampling (`factor < 1` slows
    /// down by duplicating frames, `factor > 1` speeds up by dropping them).
    SpeedChange { factor: f64, region: (f64, f64) },
    /// Splices in `duration_seconds` of random poses.
    InsertNoise {
        duration_seconds: f64,
        position: Position,
    },
    /// Splices in the first `duration_seconds` of `donor`.
    InsertClip {
        duration_seconds: f64,
        position: Position,
        donor: PoseSequence,
    },
    /// Cuts the source at the given fractions and concatenates the pieces in
    /// `permutation` order.
    ReorderSegments {
        boundaries: Vec<f64>,
        permutation: Vec<usize>,
    },
    /// Mirror image with left/right labels swapped.
    FlipHorizontal,
    /// Uniform scaling of every keypoint about `center`.
    Zoom { scale: f64, center: [f64; 2] },
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Identity => f.write_str("same video"),
            Perturbation::SpeedChange { factor, region } => {
                if *region == (0.0, 1.0) {
                    write!(f, "speed x{factor}")
                } else {
                    write!(f, "speed x{factor} over [{}, {})", region.0, region.1)
                }
            }
            Perturbation::InsertNoise {
                duration_seconds,
                position,
            } => write!(f, "{duration_seconds} s noise at {}", position.as_str()),
            Perturbation::InsertClip {
                duration_seconds,
                position,
                donor,
            } => write!(
                f,
                "{duration_seconds} s clip of {} at {}",
                donor.source,
                position.as_str()
            ),
            Perturbation::ReorderSegments { permutation, .. } => {
                write!(f, "segments reordered as {permutation:?}")
            }
            Perturbation::FlipHorizontal => f.write_str("flipped video"),
            Perturbation::Zoom { scale, .. } => write!(f, "zoom x{scale}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("invalid perturbation: {0}")]
    InvalidSpec(String),
    #[error("alignment covers {alignment} reference frames but ground truth has {truth}")]
    LengthMismatch { alignment: usize, truth: usize },
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error("scenario `{name}`: {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<EvalError>,
    },
}

impl EvalError {
    pub fn is_incomparable(&self) -> bool {
        match self {
            EvalError::Align(e) => e.is_incomparable(),
            EvalError::Scenario { source, .. } => source.is_incomparable(),
            _ => false,
        }
    }
}

fn invalid(msg: impl Into<String>) -> EvalError {
    EvalError::InvalidSpec(msg.into())
}

/// True frame correspondence induced by a perturbation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthMap {
    /// For each reference frame, the test frame showing the same content.
    pub truth: Vec<Option<usize>>,
    /// For each test frame, the reference frame it was copied from, or
    /// `None` for inserted content.
    pub test_origin: Vec<Option<usize>>,
}

impl GroundTruthMap {
    pub fn identity(n: usize) -> Self {
        Self {
            truth: (0..n).map(Some).collect(),
            test_origin: (0..n).map(Some).collect(),
        }
    }

    /// Derives `truth` from `test_origin`: the first test frame copied from
    /// each reference frame, or, if the frame was dropped, the test frame
    /// whose origin is nearest (earliest on ties).
    pub fn from_origins(n_ref: usize, test_origin: Vec<Option<usize>>) -> Self {
        let mut truth = vec![None; n_ref];
        for (j, o) in test_origin.iter().enumerate() {
            if let Some(i) = *o {
                if truth[i].is_none() {
                    truth[i] = Some(j);
                }
            }
        }
        for (i, slot) in truth.iter_mut().enumerate() {
            if slot.is_none() {
                *slot = test_origin
                    .iter()
                    .enumerate()
                    .filter_map(|(j, o)| o.map(|o| (o.abs_diff(i), j)))
                    .min()
                    .map(|(_, j)| j);
            }
        }
        Self { truth, test_origin }
    }

    pub fn noise_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.test_origin
            .iter()
            .enumerate()
            .filter_map(|(j, o)| o.is_none().then_some(j))
    }

    pub fn n_expected(&self) -> usize {
        self.truth.iter().flatten().count()
    }
}

fn splice(
    source: &PoseSequence,
    position: Position,
    inserted: Vec<PoseFrame>,
) -> (Vec<PoseFrame>, Vec<Option<usize>>) {
    let at = position.index(source.len());
    let mut frames = Vec::with_capacity(source.len() + inserted.len());
    let mut origin = Vec::with_capacity(frames.capacity());
    frames.extend_from_slice(&source.frames[..at]);
    origin.extend((0..at).map(Some));
    origin.extend(core::iter::repeat_n(None, inserted.len()));
    frames.extend(inserted);
    frames.extend_from_slice(&source.frames[at..]);
    origin.extend((at..source.len()).map(Some));
    (frames, origin)
}

fn inserted_count(duration_seconds: f64, fps: f64) -> Result<usize, EvalError> {
    if !(duration_seconds.is_finite() && duration_seconds > 0.0) {
        return Err(invalid(format!(
            "duration {duration_seconds} must be positive"
        )));
    }
    match frame_count(duration_seconds, fps) {
        0 => Err(invalid(format!(
            "{duration_seconds} s at {fps} fps inserts no frames"
        ))),
        n => Ok(n),
    }
}

fn fraction_index(frac: f64, len: usize) -> usize {
    libm::floor(frac * len as f64) as usize
}

/// Output length and source indices of a speed change over `[start, end)`.
fn resample(start: usize, end: usize, factor: f64) -> Vec<usize> {
    let len = end - start;
    let out_len = (libm::round(len as f64 / factor) as usize).max(1);
    (0..out_len)
        .map(|j| start + (libm::floor(j as f64 * factor + 1e-9) as usize).min(len - 1))
        .collect()
}

/// Predicted test length of `perturbation` applied to `n` frames at `fps`.
pub fn perturbed_len(perturbation: &Perturbation, n: usize, fps: f64) -> Result<usize, EvalError> {
    Ok(match perturbation {
        Perturbation::Identity | Perturbation::FlipHorizontal | Perturbation::Zoom { .. } => n,
        Perturbation::ReorderSegments { .. } => n,
        Perturbation::SpeedChange { factor, region } => {
            let (s, e) = (fraction_index(region.0, n), fraction_index(region.1, n));
            n - (e - s) + (libm::round((e - s) as f64 / factor) as usize).max(1)
        }
        Perturbation::InsertNoise {
            duration_seconds, ..
        }
        | Perturbation::InsertClip {
            duration_seconds, ..
        } => n + inserted_count(*duration_seconds, fps)?,
    })
}

/// Applies `perturbation` to `source`. `seed` drives any random content.
pub fn apply_perturbation(
    source: &PoseSequence,
    perturbation: &Perturbation,
    seed: u64,
) -> Result<(PoseSequence, GroundTruthMap), EvalError> {
    let n = source.len();
    if n == 0 {
        return Err(invalid("source sequence is empty"));
    }
    let label = format!("{} | {perturbation}", source.source);
    let (frames, origin) = match perturbation {
        Perturbation::Identity => (source.frames.clone(), (0..n).map(Some).collect()),
        Perturbation::FlipHorizontal => (
            source.frames.iter().map(PoseFrame::flipped).collect(),
            (0..n).map(Some).collect(),
        ),
        Perturbation::Zoom { scale, center } => {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(invalid(format!("zoom scale {scale} must be positive")));
            }
            if !(center[0].is_finite() && center[1].is_finite()) {
                return Err(invalid("zoom center must be finite"));
            }
            let frames = source
                .frames
                .iter()
                .map(|f| {
                    f.map_positions(|p| {
                        [
                            center[0] + scale * (p[0] - center[0]),
                            center[1] + scale * (p[1] - center[1]),
                        ]
                    })
                })
                .collect();
            (frames, (0..n).map(Some).collect())
        }
        Perturbation::SpeedChange { factor, region } => {
            if !(factor.is_finite() && *factor > 0.0) {
                return Err(invalid(format!("speed factor {factor} must be positive")));
            }
            let (s, e) = *region;
            if !(0.0 <= s && s < e && e <= 1.0) {
                return Err(invalid(format!("region [{s}, {e}) is not inside [0, 1]")));
            }
            let (start, end) = (fraction_index(s, n), fraction_index(e, n));
            if start >= end {
                return Err(invalid(format!(
                    "region [{s}, {e}) selects no frames of a {n}-frame sequence"
                )));
            }
            let src: Vec<usize> = (0..start)
                .chain(resample(start, end, *factor))
                .chain(end..n)
                .collect();
            let frames = src.iter().map(|&i| source.frames[i]).collect();
            (frames, src.into_iter().map(Some).collect())
        }
        Perturbation::InsertNoise {
            duration_seconds,
            position,
        } => {
            let count = inserted_count(*duration_seconds, source.fps)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = (0..count).map(|_| random_pose(&mut rng)).collect();
            splice(source, *position, noise)
        }
        Perturbation::InsertClip {
            duration_seconds,
            position,
            donor,
        } => {
            let count = inserted_count(*duration_seconds, source.fps)?;
            if donor.len() < count {
                return Err(invalid(format!(
                    "donor has {} frames, {count} needed",
                    donor.len()
                )));
            }
            splice(source, *position, donor.frames[..count].to_vec())
        }
        Perturbation::ReorderSegments {
            boundaries,
            permutation,
        } => {
            let mut cuts = vec![0];
            for &b in boundaries {
                if !(b > 0.0 && b < 1.0) {
                    return Err(invalid(format!(
                        "segment boundary {b} is not inside (0, 1)"
                    )));
                }
                let c = fraction_index(b, n);
                if c <= *cuts.last().unwrap() {
                    return Err(invalid(
                        "segment boundaries must be increasing and leave every segment non-empty",
                    ));
                }
                cuts.push(c);
            }
            if *cuts.last().unwrap() >= n {
                return Err(invalid("last segment is empty"));
            }
            cuts.push(n);
            let segments = cuts.len() - 1;
            let mut seen = vec![false; segments];
            if permutation.len() != segments
                || !permutation
                    .iter()
                    .all(|&p| p < segments && !core::mem::replace(&mut seen[p], true))
            {
                return Err(invalid(format!(
                    "{permutation:?} is not a permutation of {segments} segments"
                )));
            }
            let src: Vec<usize> = permutation
                .iter()
                .flat_map(|&p| cuts[p]..cuts[p + 1])
                .collect();
            let frames = src.iter().map(|&i| source.frames[i]).collect();
            (frames, src.into_iter().map(Some).collect())
        }
    };
    let truth = GroundTruthMap::from_origins(n, origin);
    Ok((source.with_frames(frames, label), truth))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scenario: String,
    pub test_description: String,
    pub n_ref: usize,
    pub n_test: usize,
    pub fps: f64,
    pub n_expected: usize,
    pub n_matched: usize,
    pub percent_matched: f64,
    pub tolerance_frames: usize,
    pub total_cost: f64,
    pub normalized_cost: f64,
}

/// Counts reference frames whose representative lies within
/// `tolerance_frames` of the true test frame.
pub fn score_alignment(
    result: &AlignmentResult,
    truth: &GroundTruthMap,
    tolerance_frames: usize,
) -> Result<EvalReport, EvalError> {
    if result.n_ref() != truth.truth.len() {
        return Err(EvalError::LengthMismatch {
            alignment: result.n_ref(),
            truth: truth.truth.len(),
        });
    }
    let mut n_expected = 0;
    let mut n_matched = 0;
    for (rep, t) in result.representatives().zip(&truth.truth) {
        if let Some(t) = *t {
            n_expected += 1;
            if rep.abs_diff(t) <= tolerance_frames {
                n_matched += 1;
            }
        }
    }
    let percent_matched = if n_expected == 0 {
        0.0
    } else {
        100.0 * n_matched as f64 / n_expected as f64
    };
    Ok(EvalReport {
        scenario: String::new(),
        test_description: String::new(),
        n_ref: result.n_ref(),
        n_test: result.n_test(),
        fps: 0.0,
        n_expected,
        n_matched,
        percent_matched,
        tolerance_frames,
        total_cost: result.total_cost,
        normalized_cost: result.normalized_cost,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub perturbation: Perturbation,
    pub seed: u64,
}

impl Scenario {
    pub fn new(name: impl Into<String>, perturbation: Perturbation, seed: u64) -> Self {
        Self {
            name: name.into(),
            perturbation,
            seed,
        }
    }
}

/// Everything one scenario produced.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub report: EvalReport,
    pub test: PoseSequence,
    pub truth: GroundTruthMap,
    pub alignment: AlignmentResult,
}

pub fn run_scenario(
    base: &PoseSequence,
    scenario: &Scenario,
    config: &MetricConfig,
    tolerance_frames: usize,
) -> Result<ScenarioOutcome, EvalError> {
    let wrap = |e: EvalError| EvalError::Scenario {
        name: scenario.name.clone(),
        source: Box::new(e),
    };
    let (test, truth) =
        apply_perturbation(base, &scenario.perturbation, scenario.seed).map_err(wrap)?;
    let cost = build_cost_matrix(base, &test, config).map_err(|e| wrap(e.into()))?;
    let alignment = dtw_align(&cost);
    let mut report = score_alignment(&alignment, &truth, tolerance_frames).map_err(wrap)?;
    report.scenario = scenario.name.clone();
    report.test_description = format!("{}", scenario.perturbation);
    report.fps = base.fps;
    Ok(ScenarioOutcome {
        report,
        test,
        truth,
        alignment,
    })
}

/// Runs every scenario against `base`; reports come back in input order.
pub fn run_scenario_suite(
    base: &PoseSequence,
    scenarios: &[Scenario],
    config: &MetricConfig,
    tolerance_frames: usize,
) -> Result<Vec<EvalReport>, EvalError> {
    scenarios
        .iter()
        .map(|s| run_scenario(base, s, config, tolerance_frames).map(|o| o.report))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::{extract_mapping, WarpingPath};

    fn alignment(path: Vec<(usize, usize)>) -> AlignmentResult {
        let path = WarpingPath(path);
        let ref_to_test = extract_mapping(&path);
        AlignmentResult {
            step_costs: vec![0.0; path.len()],
            total_cost: 0.0,
            normalized_cost: 0.0,
            path,
            ref_to_test,
        }
    }

    #[test]
    fn identity_scores_full_marks() {
        let r = alignment(vec![(0, 0), (1, 1), (2, 2)]);
        let rep = score_alignment(&r, &GroundTruthMap::identity(3), 0).unwrap();
        assert_eq!((rep.n_expected, rep.n_matched), (3, 3));
        assert_eq!(rep.percent_matched, 100.0);
    }

    #[test]
    fn off_by_one_depends_on_tolerance() {
        // Every reference frame lands one test frame late.
        let r = alignment(vec![(0, 0), (0, 1), (1, 2), (2, 3)]);
        let truth = GroundTruthMap {
            truth: vec![Some(1), Some(1), Some(2)],
            test_origin: vec![None, Some(0), Some(1), Some(2)],
        };
        // Representatives are 0, 2, 3.
        assert_eq!(
            score_alignment(&r, &truth, 2).unwrap().percent_matched,
            100.0
        );
        assert_eq!(score_alignment(&r, &truth, 0).unwrap().percent_matched, 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let r = alignment(vec![(0, 0), (1, 1)]);
        assert!(matches!(
            score_alignment(&r, &GroundTruthMap::identity(3), 0),
            Err(EvalError::LengthMismatch {
                alignment: 2,
                truth: 3
            })
        ));
    }

    #[test]
    fn resample_examples() {
        assert_eq!(resample(0, 3, 0.5), vec![0, 0, 1, 1, 2, 2]);
        assert_eq!(resample(0, 4, 2.0), vec![0, 2]);
        assert_eq!(resample(2, 4, 0.25), vec![2, 2, 2, 2, 3, 3, 3, 3]);
        assert_eq!(resample(0, 1, 4.0), vec![0]);
    }

    #[test]
    fn nearest_truth_for_dropped_frames() {
        let g = GroundTruthMap::from_origins(4, vec![Some(0), Some(2)]);
        assert_eq!(g.truth, vec![Some(0), Some(0), Some(1), Some(1)]);
    }
}
