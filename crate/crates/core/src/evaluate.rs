//! End-to-end evaluation of a set of algorithms against annotated landmarks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    correlate, per_annotator_matrix, threshold_ranking, tre_summary, CorrelationRadius,
    SummaryStats,
};
use crate::error::{Error, Result};
use crate::io::{
    AlgorithmReport, CrossingReport, DatasetSummary, DistanceReport, EvaluationReport, ImageRate,
    ImageRates, RankingReport, RunConfig, Warning,
};
use crate::metrics::{
    build_consensus, hit_rate, pool_distances, MissingPolicy, PoolScope, RadiusSpec,
};
use crate::model::{AnnotationStore, PredictionStore};
use crate::radii::{
    build_curve, find_crossings, robust_stats, Aggregation, CurveSchedule, HitRateCurve, MuGrid,
    RadiusScope, RobustStats,
};

pub const TOOL_NAME: &str = "hitr";

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub mu_grid: MuGrid,
    pub scope: RadiusScope,
    pub missing_policy: MissingPolicy,
    pub aggregation: Aggregation,
    pub correlation_radius: CorrelationRadius,
}

/// Everything `evaluate` computes: the report plus chart inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: EvaluationReport,
    pub curves: Vec<HitRateCurve>,
    pub tre_summaries: Vec<(String, SummaryStats)>,
    pub annotator_spreads: Vec<(String, SummaryStats)>,
}

fn check(violations: Vec<crate::model::Violation>, what: &str) -> Result<()> {
    if violations.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
    Err(Error::InvalidStore(format!("{what}: {}", list.join("; "))))
}

pub fn evaluate(
    store: &AnnotationStore,
    predictions: &PredictionStore,
    config: &RunConfig,
) -> Result<Evaluation> {
    check(store.validate(), "annotations")?;
    check(predictions.validate(), "predictions")?;
    let cfg = config.evaluation;
    let consensus = build_consensus(store)?;

    let global_d = pool_distances(store, &consensus, &PoolScope::Global)?;
    let global_stats = robust_stats(&global_d)?;
    let mut per_image_stats: BTreeMap<String, RobustStats> = BTreeMap::new();
    for image in store.image_ids() {
        let d = pool_distances(store, &consensus, &PoolScope::Image(image.to_owned()))?;
        per_image_stats.insert(image.to_owned(), robust_stats(&d)?);
    }

    let mus = cfg.mu_grid.values()?;
    let global_schedule = match CurveSchedule::global(store, &consensus, &mus)? {
        CurveSchedule::Global(s) => s,
        CurveSchedule::PerImage(_) => unreachable!(),
    };
    let schedule = match cfg.scope {
        RadiusScope::Global => CurveSchedule::Global(global_schedule.clone()),
        RadiusScope::Image => CurveSchedule::per_image(store, &consensus, &mus)?,
    };

    let matrix = per_annotator_matrix(store, &consensus, predictions)?;
    let mut warnings = Vec::new();
    let mut curves = Vec::new();
    let mut algorithms = BTreeMap::new();
    let mut tre_summaries = Vec::new();
    let mut annotator_spreads = Vec::new();

    for alg in predictions.algorithm_ids() {
        let built = build_curve(
            &consensus,
            predictions,
            alg,
            &schedule,
            cfg.missing_policy,
            cfg.aggregation,
        )?;
        warnings.extend(built.missing.iter().map(|key| Warning::MissingPrediction {
            algorithm_id: alg.to_owned(),
            image_id: key.image_id.clone(),
            landmark_id: key.landmark_id.clone(),
        }));

        let mut per_image = BTreeMap::new();
        let (mut hits, mut landmarks, mut rate_sum) = (0, 0, 0.0);
        for image in consensus.image_ids() {
            let radius = match cfg.scope {
                RadiusScope::Global => global_stats.median,
                RadiusScope::Image => per_image_stats[image].median,
            };
            let r = hit_rate(
                &consensus,
                predictions,
                alg,
                image,
                RadiusSpec::Uniform(radius),
                cfg.missing_policy,
            )?;
            hits += r.hits;
            landmarks += r.landmarks;
            rate_sum += r.rate();
            per_image.insert(
                image.to_owned(),
                ImageRate {
                    radius_mm: radius,
                    hit_rate: r.rate(),
                },
            );
        }
        let overall = match cfg.aggregation {
            Aggregation::ImageMean => rate_sum / per_image.len() as f64,
            Aggregation::LandmarkPooled => hits as f64 / landmarks as f64,
        };

        let tre = match tre_summary(predictions, store, alg) {
            Ok(s) => Some(s),
            Err(Error::EmptyPool(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(s) = tre {
            tre_summaries.push((alg.to_owned(), s));
        }
        let spread = matrix.spread.get(alg).copied();
        if let Some(s) = spread {
            annotator_spreads.push((alg.to_owned(), s));
        }
        algorithms.insert(
            alg.to_owned(),
            AlgorithmReport {
                curve: built.curve.samples().to_vec(),
                at_median: ImageRates { overall, per_image },
                tre,
                per_annotator: matrix.cells.get(alg).cloned().unwrap_or_default(),
                per_annotator_spread: spread,
                runtime_s: predictions.runtimes().and_then(|m| m.get(alg).copied()),
            },
        );
        curves.push(built.curve);
    }

    let ranking = RankingReport {
        radius_mm: global_stats.median,
        entries: threshold_ranking(&curves, global_stats.median, predictions.runtimes())?,
    };

    let mut crossings = Vec::new();
    for (i, a) in curves.iter().enumerate() {
        for b in &curves[i + 1..] {
            for x in find_crossings(a, b)? {
                crossings.push(CrossingReport {
                    a: a.algorithm_id.clone(),
                    b: b.algorithm_id.clone(),
                    lower_mm: x.lower,
                    upper_mm: x.upper,
                    direction: x.direction,
                });
            }
        }
    }

    let correlation = match correlate(store, &consensus, predictions, cfg.correlation_radius) {
        Ok(c) => Some(c),
        Err(Error::UndefinedCorrelation(reason)) => {
            warnings.push(Warning::UndefinedCorrelation {
                reason: reason.to_owned(),
            });
            None
        }
        Err(e) => return Err(e),
    };

    let report = EvaluationReport {
        tool: TOOL_NAME.to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config: config.clone(),
        dataset: DatasetSummary {
            images: consensus.image_ids().len(),
            landmarks: store.len(),
            annotations: store.annotation_count(),
            annotators: store
                .annotator_ids()
                .into_iter()
                .map(str::to_owned)
                .collect(),
            algorithms: predictions.algorithm_ids().map(str::to_owned).collect(),
            weighted: store.weights().is_some(),
        },
        distances: DistanceReport {
            n: global_d.len(),
            stats: global_stats,
            per_image: per_image_stats,
        },
        schedule: global_schedule.points,
        algorithms,
        ranking,
        crossings,
        correlation,
        warnings,
    };
    Ok(Evaluation {
        report,
        curves,
        tre_summaries,
        annotator_spreads,
    })
}
