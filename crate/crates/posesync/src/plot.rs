//! Warping-path SVG and per-step cost profile.
//!
//! Reference frames run along x, test frames up the y axis, one unit per
//! frame on both axes. The path is a single `<polyline id="warping-path">`
//! whose points are the frame pairs mapped through that scale; coordinates
//! are written with six decimals.

use std::fmt::Write as _;

use posealign_core::AlignmentResult;

const PLOT_SIZE: f64 = 600.0;
const MARGIN: f64 = 50.0;

/// Pixels per frame and the two plot extents.
fn geometry(n_ref: usize, n_test: usize) -> (f64, f64, f64) {
    let span = (n_ref.max(n_test).max(2) - 1) as f64;
    let unit = PLOT_SIZE / span;
    let w = (n_ref.max(1) - 1) as f64 * unit;
    let h = (n_test.max(1) - 1) as f64 * unit;
    (unit, w, h)
}

pub fn path_svg(result: &AlignmentResult) -> String {
    let (n_ref, n_test) = (result.n_ref(), result.n_test());
    let (unit, w, h) = geometry(n_ref, n_test);
    let (width, height) = (w + 2.0 * MARGIN, h + 2.0 * MARGIN);
    let x = |i: usize| MARGIN + i as f64 * unit;
    let y = |j: usize| MARGIN + h - j as f64 * unit;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.6}" height="{height:.6}" viewBox="0 0 {width:.6} {height:.6}">"#
    );
    let _ = writeln!(
        s,
        r#"  <title>warping path: {n_ref} reference x {n_test} test frames, total cost {:.6}, normalized {:.6}</title>"#,
        result.total_cost, result.normalized_cost
    );
    let _ = writeln!(
        s,
        r##"  <rect x="0" y="0" width="{width:.6}" height="{height:.6}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        s,
        r##"  <rect id="grid" x="{MARGIN:.6}" y="{MARGIN:.6}" width="{w:.6}" height="{h:.6}" fill="none" stroke="#bbbbbb"/>"##
    );
    let points: Vec<String> = result
        .path
        .pairs()
        .iter()
        .map(|&(i, j)| format!("{:.6},{:.6}", x(i), y(j)))
        .collect();
    let _ = writeln!(
        s,
        r##"  <polyline id="warping-path" fill="none" stroke="#c0392b" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    let _ = writeln!(
        s,
        r#"  <text x="{:.6}" y="{:.6}" text-anchor="middle" font-size="14">reference frame (0 to {})</text>"#,
        MARGIN + w / 2.0,
        height - 15.0,
        n_ref.saturating_sub(1)
    );
    let _ = writeln!(
        s,
        r#"  <text x="15" y="{:.6}" text-anchor="middle" font-size="14" transform="rotate(-90 15 {:.6})">test frame (0 to {})</text>"#,
        MARGIN + h / 2.0,
        MARGIN + h / 2.0,
        n_test.saturating_sub(1)
    );
    s.push_str("</svg>\n");
    s
}

/// `step,ref,test,cost,cumulative`, one row per path step. Cost columns are
/// left empty when the alignment carries no step costs.
pub fn cost_profile_csv(result: &AlignmentResult) -> String {
    let mut s = String::from("step,ref,test,cost,cumulative\n");
    let mut total = 0.0;
    for (k, &(i, j)) in result.path.pairs().iter().enumerate() {
        match result.step_costs.get(k) {
            Some(c) => {
                total += c;
                let _ = writeln!(s, "{k},{i},{j},{c},{total}");
            }
            None => {
                let _ = writeln!(s, "{k},{i},{j},,");
            }
        }
    }
    s
}
