//! Command-line front end: spec parsing, run orchestration and SVG output.

pub mod run;
pub mod spec;
pub mod svg;
