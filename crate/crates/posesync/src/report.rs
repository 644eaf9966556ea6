//! Evaluation report output: JSON for scripts, a plain table for people.

use posealign_core::EvalReport;
use serde::Serialize;

#[derive(Serialize)]
struct ReportDoc<'a> {
    scenario: &'a str,
    test_description: &'a str,
    n_ref: usize,
    n_test: usize,
    ref_seconds: f64,
    test_seconds: f64,
    fps: f64,
    n_expected: usize,
    n_matched: usize,
    percent_matched: f64,
    tolerance_frames: usize,
    total_cost: f64,
    normalized_cost: f64,
}

impl<'a> From<&'a EvalReport> for ReportDoc<'a> {
    fn from(r: &'a EvalReport) -> Self {
        Self {
            scenario: &r.scenario,
            test_description: &r.test_description,
            n_ref: r.n_ref,
            n_test: r.n_test,
            ref_seconds: r.n_ref as f64 / r.fps,
            test_seconds: r.n_test as f64 / r.fps,
            fps: r.fps,
            n_expected: r.n_expected,
            n_matched: r.n_matched,
            percent_matched: r.percent_matched,
            tolerance_frames: r.tolerance_frames,
            total_cost: r.total_cost,
            normalized_cost: r.normalized_cost,
        }
    }
}

/// A JSON array with one object per report, in order.
pub fn reports_to_json(reports: &[EvalReport]) -> String {
    let docs: Vec<ReportDoc> = reports.iter().map(ReportDoc::from).collect();
    let mut s = serde_json::to_string_pretty(&docs).expect("reports serialize");
    s.push('\n');
    s
}

const HEADERS: [&str; 7] = [
    "scenario",
    "ref (s)",
    "test",
    "test (s)",
    "expected",
    "matched",
    "% matched",
];

/// Column-aligned table, one row per report. Numeric columns are right
/// aligned.
pub fn reports_table(reports: &[EvalReport]) -> String {
    let rows: Vec<[String; 7]> = reports
        .iter()
        .map(|r| {
            [
                r.scenario.clone(),
                format!("{:.2}", r.n_ref as f64 / r.fps),
                r.test_description.clone(),
                format!("{:.2}", r.n_test as f64 / r.fps),
                r.n_expected.to_string(),
                r.n_matched.to_string(),
                format!("{:.2}", r.percent_matched),
            ]
        })
        .collect();
    let mut widths = HEADERS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let numeric = [false, true, false, true, true, true, true];
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(widths)
            .zip(numeric)
            .map(|((c, w), right)| {
                if right {
                    format!("{c:>w$}")
                } else {
                    format!("{c:<w$}")
                }
            })
            .collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADERS.map(String::from));
    out.push_str(&line(&widths.map(|w| "-".repeat(w))));
    for row in &rows {
        out.push_str(&line(row));
    }
    out
}
