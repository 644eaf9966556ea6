//! Files, reports and the `posealign` command line around `posealign-core`.
//!
//! Every on-disk format lives here: keypoint sequences ([`format`]), metric
//! configuration ([`config`]), alignment results ([`alignment`]) and scenario
//! suites ([`scenarios`]). The core crate stays free of IO.

pub mod alignment;
pub mod cli;
pub mod config;
pub mod format;
pub mod plot;
pub mod report;
pub mod scenarios;

pub use posealign_core as core;
