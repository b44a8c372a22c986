//! File formats.
//!
//! | file | header |
//! |------|--------|
//! | annotations | `image_id,landmark_id,annotator_id,x_mm,y_mm,z_mm` |
//! | predictions | `algorithm_id,image_id,landmark_id,x_mm,y_mm,z_mm` |
//! | runtimes (sidecar of predictions) | `algorithm_id,seconds` |
//! | weights | `annotator_id,lambda` |
//! | curves | `algorithm_id,mu,radius_mm,hit_rate` |
//!
//! Coordinates are written with the shortest representation that parses back
//! to the same `f64`. Curves and the JSON report use six significant digits.

mod report;
mod svg;
mod tables;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use report::{
    AlgorithmReport, CrossingReport, DatasetSummary, DistanceReport, EvaluationReport, ImageRate,
    ImageRates, RankingReport, RunConfig, Warning,
};
pub use svg::{box_chart_svg, line_chart_svg, write_box_chart, write_line_chart};
pub use tables::*;

/// Rounds to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

/// Six-significant-digit text form, without exponent or trailing zeros.
pub fn format_sig6(x: f64) -> String {
    round_sig6(x).to_string()
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}
