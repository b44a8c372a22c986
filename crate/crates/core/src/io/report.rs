use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{CorrelationReport, RankingEntry, SummaryStats};
use crate::error::Result;
use crate::evaluate::EvaluationConfig;
use crate::radii::{CrossingDirection, CurveSample, RobustStats, SchedulePoint};

use super::{round_sig6, write_file};

/// Invocation parameters, echoed into every report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    /// Input role -> path as given.
    pub inputs: BTreeMap<String, String>,
    #[serde(flatten)]
    pub evaluation: EvaluationConfig,
    pub seed: Option<u64>,
    pub annotators: Option<usize>,
    pub threshold: Option<f64>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub images: usize,
    pub landmarks: usize,
    pub annotations: usize,
    pub annotators: Vec<String>,
    pub algorithms: Vec<String>,
    pub weighted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub n: usize,
    #[serde(flatten)]
    pub stats: RobustStats,
    pub per_image: BTreeMap<String, RobustStats>,
}

/// Hit rates at the median inter-rater distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRates {
    pub overall: f64,
    /// image -> (radius used, hit rate)
    pub per_image: BTreeMap<String, ImageRate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageRate {
    pub radius_mm: f64,
    pub hit_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub curve: Vec<CurveSample>,
    pub at_median: ImageRates,
    /// TRE against every individual annotation.
    pub tre: Option<SummaryStats>,
    pub per_annotator: BTreeMap<String, f64>,
    pub per_annotator_spread: Option<SummaryStats>,
    pub runtime_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub radius_mm: f64,
    pub entries: Vec<RankingEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub a: String,
    pub b: String,
    pub lower_mm: f64,
    pub upper_mm: f64,
    pub direction: CrossingDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    MissingPrediction {
        algorithm_id: String,
        image_id: String,
        landmark_id: String,
    },
    UndefinedCorrelation {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub dataset: DatasetSummary,
    pub distances: DistanceReport,
    pub schedule: Vec<SchedulePoint>,
    pub algorithms: BTreeMap<String, AlgorithmReport>,
    pub ranking: RankingReport,
    pub crossings: Vec<CrossingReport>,
    pub correlation: Option<CorrelationReport>,
    pub warnings: Vec<Warning>,
}

fn canonicalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig6(n.as_f64().expect("f64 number"));
            if let Some(rounded) = serde_json::Number::from_f64(x) {
                *n = rounded;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(canonicalize),
        Value::Object(map) => map.values_mut().for_each(canonicalize),
        _ => {}
    }
}

impl EvaluationReport {
    /// Pretty JSON with sorted keys and floats rounded to six significant digits.
    pub fn to_json(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        canonicalize(&mut value);
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }
}
