//! DTW checked against exhaustive path enumeration, plus path and cost
//! properties on pose sequences.

use posealign_core::dtw::{build_cost_matrix, dtw_align, CostMatrix};
use posealign_core::metrics::frame_cost;
use posealign_core::synth::synth_sequence;
use posealign_core::{KeypointName, MetricConfig, Motion, Normalization, PoseFrame, PoseSequence};
use proptest::prelude::*;

/// Every boundary-anchored unit-step path through the grid, with its cost
/// accumulated from (0,0) forward.
fn enumerate_paths(cost: &CostMatrix) -> Vec<(f64, Vec<(usize, usize)>)> {
    fn walk(
        cost: &CostMatrix,
        at: (usize, usize),
        sum: f64,
        path: &mut Vec<(usize, usize)>,
        out: &mut Vec<(f64, Vec<(usize, usize)>)>,
    ) {
        let (n, m) = (cost.n_ref(), cost.n_test());
        if at == (n - 1, m - 1) {
            out.push((sum, path.clone()));
            return;
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            let next = (at.0 + di, at.1 + dj);
            if next.0 < n && next.1 < m {
                path.push(next);
                walk(cost, next, sum + cost.get(next.0, next.1), path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(cost, (0, 0), cost.get(0, 0), &mut vec![(0, 0)], &mut out);
    out
}

fn scalar_cost(a: &[f64], b: &[f64]) -> CostMatrix {
    CostMatrix::from_fn(a.len(), b.len(), |i, j| (a[i] - b[j]).abs()).unwrap()
}

#[test]
fn brute_force_confirms_tie_break_example() {
    let cost = scalar_cost(&[1.0, 3.0], &[1.0, 2.0, 3.0]);
    let paths = enumerate_paths(&cost);
    let best = paths.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    assert_eq!(best, 1.0);
    let optimal: Vec<_> = paths
        .iter()
        .filter(|p| p.0 == best)
        .map(|p| p.1.clone())
        .collect();
    // Two optimal paths; the diagonal-first backtrack picks the one that
    // reaches the corner by a diagonal step.
    assert_eq!(optimal.len(), 2);
    assert!(optimal.contains(&vec![(0, 0), (0, 1), (1, 2)]));
    let r = dtw_align(&cost);
    assert_eq!(r.total_cost, 1.0);
    assert_eq!(r.path.pairs(), &[(0, 0), (0, 1), (1, 2)]);
}

fn frame(seed: u64) -> PoseFrame {
    let seq = synth_sequence(Motion::Squat, 4.0, 5.0, seed).unwrap();
    seq.frames[seed as usize % seq.len()]
}

#[test]
fn cost_matrix_matches_direct_metric_calls() {
    for cfg in [
        MetricConfig::angle_mae(),
        MetricConfig::keypoint_mae(Normalization::None),
        MetricConfig::keypoint_mae(Normalization::BoundingBox),
    ] {
        let r = PoseSequence::new(vec![frame(1), frame(5)], 25.0, "r").unwrap();
        let t = PoseSequence::new(vec![frame(2), frame(9), frame(13)], 25.0, "t").unwrap();
        let c = build_cost_matrix(&r, &t, &cfg).unwrap();
        assert_eq!((c.n_ref(), c.n_test()), (2, 3));
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(
                    c.get(i, j),
                    frame_cost(&r.frames[i], &t.frames[j], &cfg).unwrap()
                );
            }
        }
    }
}

#[test]
fn self_cost_matrix_has_zero_diagonal() {
    let s = synth_sequence(Motion::ArmWave, 3.0, 1.0, 4).unwrap();
    let c = build_cost_matrix(&s, &s, &MetricConfig::angle_mae()).unwrap();
    assert_eq!(c.n_ref(), 3);
    for i in 0..3 {
        assert_eq!(c.get(i, i), 0.0);
    }
    let one = PoseSequence::new(vec![s.frames[0]], 25.0, "x").unwrap();
    let two = PoseSequence::new(vec![s.frames[2]], 25.0, "y").unwrap();
    let c = build_cost_matrix(&one, &two, &MetricConfig::angle_mae()).unwrap();
    assert_eq!(
        c.get(0, 0),
        frame_cost(&s.frames[0], &s.frames[2], &MetricConfig::angle_mae()).unwrap()
    );
}

fn blind(mut f: PoseFrame) -> PoseFrame {
    for kp in f.keypoints.iter_mut() {
        kp.confidence = 0.0;
    }
    f
}

#[test]
fn incomparable_pairs_get_max_plus_range() {
    let cfg = MetricConfig::angle_mae();
    let r = PoseSequence::new(vec![frame(1), blind(frame(3))], 25.0, "r").unwrap();
    let t = PoseSequence::new(vec![frame(2), frame(7)], 25.0, "t").unwrap();
    let c = build_cost_matrix(&r, &t, &cfg).unwrap();
    let max = c.get(0, 0).max(c.get(0, 1));
    assert_eq!(c.get(1, 0), max + std::f64::consts::PI);
    assert_eq!(c.get(1, 1), max + std::f64::consts::PI);

    let r = PoseSequence::new(vec![blind(frame(1))], 25.0, "r").unwrap();
    let err = build_cost_matrix(&r, &t, &cfg).unwrap_err();
    assert!(err.is_incomparable());
}

#[test]
fn partial_confidence_still_compares() {
    let cfg = MetricConfig::angle_mae();
    let mut f = frame(4);
    f.get_mut(KeypointName::LeftWrist).confidence = 0.0;
    f.get_mut(KeypointName::Nose).confidence = 0.0;
    let g = frame(4);
    assert_eq!(frame_cost(&f, &g, &cfg).unwrap(), 0.0);
}

#[test]
fn aligning_a_transformed_copy_is_free_and_diagonal() {
    let s = synth_sequence(Motion::WalkCycle, 4.0, 25.0, 11).unwrap();
    let (sin, cos) = 0.7f64.sin_cos();
    let moved = s.with_frames(
        s.frames
            .iter()
            .map(|f| {
                f.map_positions(|[x, y]| {
                    [
                        2.5 * (cos * x - sin * y) - 0.3,
                        2.5 * (sin * x + cos * y) + 0.8,
                    ]
                })
            })
            .collect(),
        "moved",
    );
    let r = dtw_align(&build_cost_matrix(&s, &moved, &MetricConfig::angle_mae()).unwrap());
    assert!(r.total_cost < 1e-6 * s.len() as f64);
    assert!(r.path.pairs().iter().enumerate().all(|(k, &p)| p == (k, k)));
}

fn scalar_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-5.0..5.0f64, 1..=8),
        prop::collection::vec(-5.0..5.0f64, 1..=8),
    )
}

proptest! {
    #[test]
    fn dp_equals_exhaustive_minimum((a, b) in scalar_pair()) {
        let cost = scalar_cost(&a, &b);
        let best = enumerate_paths(&cost).into_iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(dtw_align(&cost).total_cost, best);
    }

    #[test]
    fn returned_path_is_valid_and_consistent((a, b) in scalar_pair()) {
        let cost = scalar_cost(&a, &b);
        let r = dtw_align(&cost);
        prop_assert_eq!(r.path.check(a.len(), b.len()), Ok(()));
        let resum: f64 = r.path.pairs().iter().map(|&(i, j)| cost.get(i, j)).sum();
        prop_assert!((resum - r.total_cost).abs() < 1e-9);
        prop_assert_eq!(r.step_costs.len(), r.path.len());
        prop_assert_eq!(r.normalized_cost, r.total_cost / r.path.len() as f64);
        for m in &r.ref_to_test {
            prop_assert!(m.test.windows(2).all(|w| w[1] == w[0] + 1));
            prop_assert!(m.test.contains(&m.representative));
        }
        prop_assert_eq!(dtw_align(&cost), r);
    }

    #[test]
    fn transposed_total_cost_is_identical((a, b) in scalar_pair()) {
        let cost = scalar_cost(&a, &b);
        let t = dtw_align(&cost.transposed());
        let r = dtw_align(&cost);
        prop_assert!((t.total_cost - r.total_cost).abs() < 1e-9);
        prop_assert_eq!(t.path.check(b.len(), a.len()), Ok(()));
    }
}
