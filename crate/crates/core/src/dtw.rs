//! Dynamic time warping between two pose sequences.
//!
//! The aligner uses the symmetric unit-step pattern: from `(i, j)` a path may
//! move to `(i + 1, j)`, `(i, j + 1)` or `(i + 1, j + 1)`. Paths start at
//! `(0, 0)` and end at `(n_ref - 1, n_test - 1)`, so every frame of both
//! sequences is matched at least once and matches never cross.
//!
//! Both the cost matrix and the accumulated-cost table are kept in memory,
//! which is `O(n_ref * n_test)`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::keypoint::PoseSequence;
use crate::metrics::{compare, prepare, MetricConfig, MetricError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AlignError {
    #[error("{which} sequence is empty")]
    EmptySequence { which: &'static str },
    #[error("no reference/test frame pair can be compared")]
    AllPairsIncomparable,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("cost matrix cell ({i}, {j}) is {value}, expected a finite non-negative value")]
    InvalidCell { i: usize, j: usize, value: f64 },
    #[error("cost matrix has {got} cells, expected {n_ref} x {n_test}")]
    Shape {
        n_ref: usize,
        n_test: usize,
        got: usize,
    },
    #[error("band half-width {0} leaves the end cell unreachable")]
    BandTooNarrow(usize),
}

impl AlignError {
    pub fn is_incomparable(&self) -> bool {
        matches!(self, AlignError::AllPairsIncomparable)
    }
}

/// Pairwise frame costs, row-major with reference frames as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n_ref: usize,
    n_test: usize,
    cells: Vec<f64>,
}

impl CostMatrix {
    pub fn new(n_ref: usize, n_test: usize, cells: Vec<f64>) -> Result<Self, AlignError> {
        if n_ref == 0 {
            return Err(AlignError::EmptySequence { which: "reference" });
        }
        if n_test == 0 {
            return Err(AlignError::EmptySequence { which: "test" });
        }
        if cells.len() != n_ref * n_test {
            return Err(AlignError::Shape {
                n_ref,
                n_test,
                got: cells.len(),
            });
        }
        if let Some(k) = cells.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(AlignError::InvalidCell {
                i: k / n_test,
                j: k % n_test,
                value: cells[k],
            });
        }
        Ok(Self {
            n_ref,
            n_test,
            cells,
        })
    }

    pub fn from_fn(
        n_ref: usize,
        n_test: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self, AlignError> {
        let mut cells = Vec::with_capacity(n_ref * n_test);
        for i in 0..n_ref {
            for j in 0..n_test {
                cells.push(f(i, j));
            }
        }
        Self::new(n_ref, n_test, cells)
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.n_test + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.cells[i * self.n_test..(i + 1) * self.n_test]
    }

    pub fn transposed(&self) -> Self {
        let mut cells = Vec::with_capacity(self.cells.len());
        for j in 0..self.n_test {
            for i in 0..self.n_ref {
                cells.push(self.get(i, j));
            }
        }
        Self {
            n_ref: self.n_test,
            n_test: self.n_ref,
            cells,
        }
    }
}

/// Pairwise costs between every reference and test frame.
///
/// Pairs the metric cannot compare (no joint valid in both frames) are priced
/// at the largest comparable cost plus the metric's range, so the aligner
/// avoids them without the total becoming infinite.
pub fn build_cost_matrix(
    reference: &PoseSequence,
    test: &PoseSequence,
    config: &MetricConfig,
) -> Result<CostMatrix, AlignError> {
    if reference.is_empty() {
        return Err(AlignError::EmptySequence { which: "reference" });
    }
    if test.is_empty() {
        return Err(AlignError::EmptySequence { which: "test" });
    }
    config.validate()?;
    let prep_ref: Vec<_> = reference
        .frames
        .iter()
        .map(|f| prepare(f, config))
        .collect();
    let prep_test: Vec<_> = test.frames.iter().map(|f| prepare(f, config)).collect();

    let mut raw = Vec::with_capacity(prep_ref.len() * prep_test.len());
    let mut max_comparable: Option<f64> = None;
    for a in &prep_ref {
        for b in &prep_test {
            let cell = match compare(a, b, config) {
                Ok(c) => {
                    max_comparable = Some(max_comparable.map_or(c, |m| m.max(c)));
                    Some(c)
                }
                Err(e) if e.is_incomparable() => None,
                Err(e) => return Err(e.into()),
            };
            raw.push(cell);
        }
    }
    let fill = max_comparable.ok_or(AlignError::AllPairsIncomparable)? + config.range();
    let cells = raw.into_iter().map(|c| c.unwrap_or(fill)).collect();
    CostMatrix::new(prep_ref.len(), prep_test.len(), cells)
}

/// Ordered `(reference, test)` index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WarpingPath(pub Vec<(usize, usize)>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathViolation {
    Empty,
    BadStart((usize, usize)),
    BadEnd((usize, usize)),
    /// Step `k` (from pair `k - 1` to pair `k`) is not a unit step.
    BadStep(usize),
    OutOfBounds(usize),
    RefNotCovered(usize),
    TestNotCovered(usize),
}

impl fmt::Display for PathViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathViolation::Empty => f.write_str("path is empty"),
            PathViolation::BadStart(p) => write!(f, "path starts at {p:?}, not (0, 0)"),
            PathViolation::BadEnd(p) => write!(f, "path ends at {p:?}, not the last cell"),
            PathViolation::BadStep(k) => write!(f, "step {k} is not a unit monotone step"),
            PathViolation::OutOfBounds(k) => write!(f, "pair {k} lies outside the matrix"),
            PathViolation::RefNotCovered(i) => write!(f, "reference frame {i} is never matched"),
            PathViolation::TestNotCovered(j) => write!(f, "test frame {j} is never matched"),
        }
    }
}

impl WarpingPath {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// Checks boundary, continuity, monotonicity and coverage for an
    /// `n_ref x n_test` grid.
    pub fn check(&self, n_ref: usize, n_test: usize) -> Result<(), PathViolation> {
        let pairs = &self.0;
        let (&first, &last) = match (pairs.first(), pairs.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(PathViolation::Empty),
        };
        if first != (0, 0) {
            return Err(PathViolation::BadStart(first));
        }
        if let Some(k) = pairs.iter().position(|&(i, j)| i >= n_ref || j >= n_test) {
            return Err(PathViolation::OutOfBounds(k));
        }
        if n_ref == 0 || n_test == 0 || last != (n_ref - 1, n_test - 1) {
            return Err(PathViolation::BadEnd(last));
        }
        for (k, w) in pairs.windows(2).enumerate() {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if di > 1 || dj > 1 || di + dj == 0 {
                return Err(PathViolation::BadStep(k + 1));
            }
        }
        // Unit steps from (0,0) to the corner already visit every row and
        // column; the explicit scan keeps the check honest for any input.
        let mut seen_ref = vec![false; n_ref];
        let mut seen_test = vec![false; n_test];
        for &(i, j) in pairs {
            seen_ref[i] = true;
            seen_test[j] = true;
        }
        if let Some(i) = seen_ref.iter().position(|s| !s) {
            return Err(PathViolation::RefNotCovered(i));
        }
        if let Some(j) = seen_test.iter().position(|s| !s) {
            return Err(PathViolation::TestNotCovered(j));
        }
        Ok(())
    }
}

/// Test frames matched to one reference frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefMatch {
    /// Contiguous, increasing.
    pub test: Vec<usize>,
    /// Lower median of `test`.
    pub representative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentResult {
    pub path: WarpingPath,
    /// Cell cost at each path step.
    pub step_costs: Vec<f64>,
    pub total_cost: f64,
    pub normalized_cost: f64,
    /// Indexed by reference frame.
    pub ref_to_test: Vec<RefMatch>,
}

impl AlignmentResult {
    pub fn n_ref(&self) -> usize {
        self.ref_to_test.len()
    }

    pub fn n_test(&self) -> usize {
        self.path.0.last().map_or(0, |&(_, j)| j + 1)
    }

    pub fn representatives(&self) -> impl Iterator<Item = usize> + '_ {
        self.ref_to_test.iter().map(|m| m.representative)
    }
}

/// Groups the path by reference frame and picks the lower-median test frame
/// of each group.
pub fn extract_mapping(path: &WarpingPath) -> Vec<RefMatch> {
    let mut out: Vec<RefMatch> = Vec::new();
    for &(i, j) in path.pairs() {
        if i == out.len() {
            out.push(RefMatch {
                test: Vec::new(),
                representative: 0,
            });
        }
        out[i].test.push(j);
    }
    for m in &mut out {
        m.representative = m.test[(m.test.len() - 1) / 2];
    }
    out
}

/// Optimal unconstrained alignment.
///
/// Backtracking breaks ties in the order diagonal, vertical (advance the
/// reference), horizontal.
pub fn dtw_align(cost: &CostMatrix) -> AlignmentResult {
    align(cost, None).expect("unconstrained alignment always reaches the end cell")
}

/// Optimal alignment restricted to a Sakoe-Chiba band of half-width `band`
/// around the (rescaled) diagonal.
pub fn dtw_align_banded(
    cost: &CostMatrix,
    band: Option<usize>,
) -> Result<AlignmentResult, AlignError> {
    align(cost, band)
}

fn in_band(i: usize, j: usize, n: usize, m: usize, band: Option<usize>) -> bool {
    let Some(w) = band else { return true };
    // Diagonal position of row i in column units.
    let centre = if n > 1 {
        i as f64 * (m - 1) as f64 / (n - 1) as f64
    } else {
        0.0
    };
    libm::fabs(j as f64 - centre) <= w as f64 + 0.5
}

fn align(cost: &CostMatrix, band: Option<usize>) -> Result<AlignmentResult, AlignError> {
    let (n, m) = (cost.n_ref, cost.n_test);
    let mut acc = vec![f64::INFINITY; n * m];
    let at = |i: usize, j: usize| i * m + j;
    for i in 0..n {
        for j in 0..m {
            if !in_band(i, j, n, m, band) && !((i, j) == (0, 0) || (i, j) == (n - 1, m - 1)) {
                continue;
            }
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    acc[at(i - 1, j - 1)]
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 {
                    acc[at(i - 1, j)]
                } else {
                    f64::INFINITY
                };
                let left = if j > 0 {
                    acc[at(i, j - 1)]
                } else {
                    f64::INFINITY
                };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = cost.get(i, j) + best;
        }
    }
    let total_cost = acc[at(n - 1, m - 1)];
    if !total_cost.is_finite() {
        return Err(AlignError::BandTooNarrow(band.unwrap_or(0)));
    }

    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n - 1, m - 1);
    pairs.push((i, j));
    while (i, j) != (0, 0) {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[at(i - 1, j - 1)];
            let up = acc[at(i - 1, j)];
            let left = acc[at(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        pairs.push((i, j));
    }
    pairs.reverse();

    let step_costs: Vec<f64> = pairs.iter().map(|&(i, j)| cost.get(i, j)).collect();
    let path = WarpingPath(pairs);
    let ref_to_test = extract_mapping(&path);
    Ok(AlignmentResult {
        normalized_cost: total_cost / path.len() as f64,
        total_cost,
        step_costs,
        path,
        ref_to_test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(a: &[f64], b: &[f64]) -> CostMatrix {
        CostMatrix::from_fn(a.len(), b.len(), |i, j| libm::fabs(a[i] - b[j])).unwrap()
    }

    #[test]
    fn identical_sequences_align_on_diagonal() {
        let r = dtw_align(&scalar(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]));
        assert_eq!(r.total_cost, 0.0);
        assert_eq!(r.path.pairs(), &[(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn tie_prefers_diagonal() {
        let r = dtw_align(&scalar(&[1.0, 3.0], &[1.0, 2.0, 3.0]));
        assert_eq!(r.total_cost, 1.0);
        assert_eq!(r.path.pairs(), &[(0, 0), (0, 1), (1, 2)]);
    }

    #[test]
    fn single_column_sums() {
        let c = CostMatrix::new(4, 1, vec![0.5, 1.0, 2.0, 0.25]).unwrap();
        let r = dtw_align(&c);
        assert_eq!(r.path.pairs(), &[(0, 0), (1, 0), (2, 0), (3, 0)]);
        assert_eq!(r.total_cost, 3.75);
        assert_eq!(r.normalized_cost, 3.75 / 4.0);
    }

    #[test]
    fn one_by_one() {
        let c = CostMatrix::new(1, 1, vec![0.7]).unwrap();
        let r = dtw_align(&c);
        assert_eq!(r.path.pairs(), &[(0, 0)]);
        assert_eq!(r.total_cost, 0.7);
    }

    #[test]
    fn mapping_examples() {
        let m = extract_mapping(&WarpingPath(vec![(0, 0), (1, 1), (2, 2)]));
        assert!(m
            .iter()
            .enumerate()
            .all(|(i, r)| r.test == [i] && r.representative == i));

        let m = extract_mapping(&WarpingPath(vec![(0, 0), (0, 1), (0, 2), (1, 3)]));
        assert_eq!(m[0].test, [0, 1, 2]);
        assert_eq!(m[0].representative, 1);
        assert_eq!(m[1].representative, 3);

        let m = extract_mapping(&WarpingPath(vec![(0, 0), (1, 0), (2, 0)]));
        assert!(m.iter().all(|r| r.test == [0] && r.representative == 0));

        let m = extract_mapping(&WarpingPath(vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 4)]));
        assert_eq!(m[0].representative, 1, "lower median on even runs");
    }

    #[test]
    fn path_checks() {
        let ok = WarpingPath(vec![(0, 0), (0, 1), (1, 2)]);
        assert_eq!(ok.check(2, 3), Ok(()));
        assert_eq!(WarpingPath(vec![]).check(2, 3), Err(PathViolation::Empty));
        assert_eq!(
            WarpingPath(vec![(0, 1), (1, 2)]).check(2, 3),
            Err(PathViolation::BadStart((0, 1)))
        );
        assert_eq!(
            WarpingPath(vec![(0, 0), (1, 1)]).check(2, 3),
            Err(PathViolation::BadEnd((1, 1)))
        );
        assert_eq!(
            WarpingPath(vec![(0, 0), (1, 2)]).check(2, 3),
            Err(PathViolation::BadStep(1))
        );
        assert_eq!(
            WarpingPath(vec![(0, 0), (0, 1), (0, 1), (1, 2)]).check(2, 3),
            Err(PathViolation::BadStep(2))
        );
        assert_eq!(
            WarpingPath(vec![(0, 0), (1, 1), (0, 2), (1, 2)]).check(2, 3),
            Err(PathViolation::BadStep(2))
        );
    }

    #[test]
    fn invalid_cells_rejected() {
        assert!(matches!(
            CostMatrix::new(1, 2, vec![0.0, f64::NAN]),
            Err(AlignError::InvalidCell { i: 0, j: 1, .. })
        ));
        assert!(matches!(
            CostMatrix::new(1, 2, vec![0.0, -1.0]),
            Err(AlignError::InvalidCell { .. })
        ));
        assert!(matches!(
            CostMatrix::new(0, 2, vec![]),
            Err(AlignError::EmptySequence { .. })
        ));
        assert!(matches!(
            CostMatrix::new(2, 2, vec![0.0]),
            Err(AlignError::Shape { .. })
        ));
    }

    #[test]
    fn band_restricts_and_reports_unreachable() {
        let a = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let c = scalar(&a, &a);
        let r = dtw_align_banded(&c, Some(0)).unwrap();
        assert_eq!(r.path.pairs(), dtw_align(&c).path.pairs());
        // A narrow band forces the path to stay near the diagonal even
        // when the unconstrained optimum would leave it.
        let b = [0.0, 0.0, 0.0, 0.0, 0.0, 5.0];
        let c = scalar(&b, &a);
        let free = dtw_align(&c);
        let banded = dtw_align_banded(&c, Some(1)).unwrap();
        assert!(banded.total_cost >= free.total_cost);
        assert!(banded
            .path
            .pairs()
            .iter()
            .all(|&(i, j)| (i as i64 - j as i64).abs() <= 1));
        assert_eq!(banded.path.check(6, 6), Ok(()));
    }

    #[test]
    fn transpose_swaps_dimensions() {
        let c = scalar(&[1.0, 3.0], &[1.0, 2.0, 3.0]);
        let t = c.transposed();
        assert_eq!((t.n_ref(), t.n_test()), (3, 2));
        assert_eq!(t.get(2, 1), c.get(1, 2));
    }
}
