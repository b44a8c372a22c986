//! Hit/TRE correlation, TRE summaries, threshold rankings and per-annotator hit rates.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{euclidean_distance, per_annotator_hits, tre, ConsensusStore};
use crate::model::{AnnotationStore, PredictionStore};
use crate::radii::{interpolate, HitRateCurve};

/// `(hit, tre)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairedObservations {
    pub pairs: Vec<(bool, f64)>,
}

impl PairedObservations {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn extend(&mut self, other: &PairedObservations) {
        self.pairs.extend_from_slice(&other.pairs);
    }
}

/// Product-moment correlation of two equally long samples.
pub fn pearson_xy(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least two pairs"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant variable"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Point-biserial correlation of the hit indicator against TRE.
pub fn pearson(pairs: &PairedObservations) -> Result<f64> {
    let hits: Vec<f64> = pairs
        .pairs
        .iter()
        .map(|&(h, _)| f64::from(u8::from(h)))
        .collect();
    let tres: Vec<f64> = pairs.pairs.iter().map(|&(_, t)| t).collect();
    pearson_xy(&hits, &tres)
}

/// Radius used to classify hits for the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "radius_mm")]
pub enum CorrelationRadius {
    /// One pair per annotation: the annotator's own distance to the consensus is the radius.
    #[default]
    PerAnnotator,
    /// One pair per landmark at a fixed radius.
    Fixed(f64),
}

/// Collects `(hit, tre)` pairs for one algorithm. TRE is measured to the consensus.
pub fn hit_tre_pairs(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    algorithm_id: &str,
    radius: CorrelationRadius,
) -> Result<PairedObservations> {
    let predicted = predictions
        .algorithm(algorithm_id)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm_id.to_owned()))?;
    let mut out = PairedObservations::default();
    for (key, &p) in predicted {
        let (Some(reference), Some(list)) = (consensus.get(key), store.get(key)) else {
            continue;
        };
        let error = tre(reference, p);
        match radius {
            CorrelationRadius::PerAnnotator => {
                for a in list {
                    out.pairs
                        .push((error <= euclidean_distance(a.point, reference), error));
                }
            }
            CorrelationRadius::Fixed(r) => out.pairs.push((error <= r, error)),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub radius: CorrelationRadius,
    pub pooled: f64,
    pub pairs: usize,
    /// `None` where the correlation is undefined for that algorithm alone.
    pub per_algorithm: BTreeMap<String, Option<f64>>,
}

/// Hit/TRE correlation pooled over all algorithms, with a per-algorithm breakdown.
pub fn correlate(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    radius: CorrelationRadius,
) -> Result<CorrelationReport> {
    let mut pooled = PairedObservations::default();
    let mut per_algorithm = BTreeMap::new();
    for alg in predictions.algorithm_ids() {
        let pairs = hit_tre_pairs(store, consensus, predictions, alg, radius)?;
        per_algorithm.insert(alg.to_owned(), pearson(&pairs).ok());
        pooled.extend(&pairs);
    }
    Ok(CorrelationReport {
        radius,
        pooled: pearson(&pooled)?,
        pairs: pooled.len(),
        per_algorithm,
    })
}

/// Five-number summary plus mean, in millimeters for TRE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub n: usize,
}

/// Quantile of sorted data, interpolating linearly between closest ranks.
fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `None` for an empty sample.
pub fn summarize(values: &[f64]) -> Option<SummaryStats> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    Some(SummaryStats {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
        // summation rounding can push a constant sample's mean off by an ulp
        mean: mean.clamp(sorted[0], sorted[sorted.len() - 1]),
        n: sorted.len(),
    })
}

/// TRE of each prediction against every individual annotation of its landmark.
pub fn pooled_tres(
    predictions: &PredictionStore,
    store: &AnnotationStore,
    algorithm_id: &str,
) -> Result<Vec<f64>> {
    let predicted = predictions
        .algorithm(algorithm_id)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm_id.to_owned()))?;
    Ok(predicted
        .iter()
        .filter_map(|(key, &p)| store.get(key).map(|list| (list, p)))
        .flat_map(|(list, p)| list.iter().map(move |a| tre(a.point, p)))
        .collect())
}

pub fn tre_summary(
    predictions: &PredictionStore,
    store: &AnnotationStore,
    algorithm_id: &str,
) -> Result<SummaryStats> {
    let pool = pooled_tres(predictions, store, algorithm_id)?;
    summarize(&pool).ok_or_else(|| Error::EmptyPool(algorithm_id.to_owned()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub algorithm_id: String,
    pub hit_rate: f64,
    pub runtime: Option<f64>,
}

/// Ranks algorithms by interpolated hit rate at radius `r`, best first.
///
/// Ties go to the faster algorithm when runtimes are known, then to the
/// lexicographically smaller id.
pub fn threshold_ranking(
    curves: &[HitRateCurve],
    r: f64,
    runtimes: Option<&BTreeMap<String, f64>>,
) -> Result<Vec<RankingEntry>> {
    if curves.is_empty() {
        return Err(Error::NoCurves);
    }
    let mut ranking = curves
        .iter()
        .map(|c| {
            Ok(RankingEntry {
                algorithm_id: c.algorithm_id.clone(),
                hit_rate: interpolate(c, r)?,
                runtime: runtimes.and_then(|m| m.get(&c.algorithm_id).copied()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranking.sort_by(|a, b| {
        b.hit_rate
            .total_cmp(&a.hit_rate)
            .then_with(|| match (a.runtime, b.runtime) {
                (Some(x), Some(y)) => x.total_cmp(&y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| a.algorithm_id.cmp(&b.algorithm_id))
    });
    Ok(ranking)
}

/// Hit rate of every algorithm judged against every annotator's radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorMatrix {
    /// algorithm -> annotator -> hit rate
    pub cells: BTreeMap<String, BTreeMap<String, f64>>,
    /// Spread of each algorithm's hit rates across annotators.
    pub spread: BTreeMap<String, SummaryStats>,
}

impl AnnotatorMatrix {
    pub fn cell_count(&self) -> usize {
        self.cells.values().map(BTreeMap::len).sum()
    }
}

pub fn per_annotator_matrix(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
) -> Result<AnnotatorMatrix> {
    let annotators = store.annotator_ids();
    let mut cells = BTreeMap::new();
    let mut spread = BTreeMap::new();
    for alg in predictions.algorithm_ids() {
        let mut row = BTreeMap::new();
        for annotator in &annotators {
            match per_annotator_hits(store, consensus, predictions, alg, annotator) {
                Ok(count) => {
                    row.insert((*annotator).to_owned(), count.rate());
                }
                Err(Error::AnnotatorWithoutCoverage { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if row.is_empty() {
            continue;
        }
        let rates: Vec<f64> = row.values().copied().collect();
        spread.insert(alg.to_owned(), summarize(&rates).expect("non-empty row"));
        cells.insert(alg.to_owned(), row);
    }
    if cells.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(AnnotatorMatrix { cells, spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::build_consensus;
    use crate::model::{LandmarkKey, Point3};

    fn obs(hits: &[u8], tres: &[f64]) -> PairedObservations {
        PairedObservations {
            pairs: hits.iter().zip(tres).map(|(&h, &t)| (h == 1, t)).collect(),
        }
    }

    #[test]
    fn pearson_worked_example() {
        // cov -3.375, sd(hit) 0.5, sd(tre) sqrt(58.1875)
        let r = pearson(&obs(&[1, 1, 0, 0], &[1.0, 2.0, 10.0, 20.0])).unwrap();
        let expected = -3.375 / (0.5 * 58.1875f64.sqrt());
        assert!((r - expected).abs() < 1e-12);
        assert!((r - -0.8849).abs() < 1e-3);
    }

    #[test]
    fn pearson_undefined_cases() {
        assert!(pearson(&obs(&[1, 1, 1], &[1.0, 2.0, 3.0])).is_err());
        assert!(pearson(&obs(&[1, 0, 1], &[2.0, 2.0, 2.0])).is_err());
        assert!(pearson(&obs(&[1], &[2.0])).is_err());
    }

    #[test]
    fn threshold_hits_correlate_negatively() {
        let tres = [0.3, 1.1, 2.5, 2.6, 4.0, 7.5, 9.0];
        for r in [0.5, 2.55, 5.0, 8.0] {
            let hits: Vec<u8> = tres.iter().map(|&t| u8::from(t <= r)).collect();
            assert!(pearson(&obs(&hits, &tres)).unwrap() < 0.0);
        }
    }

    #[test]
    fn summary_quantiles() {
        let s = summarize(&[3.0]).unwrap();
        assert_eq!([s.min, s.q1, s.median, s.q3, s.max, s.mean], [3.0; 6]);
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (1.75, 2.5, 3.25));
        assert!(summarize(&[]).is_none());
    }

    #[test]
    fn tre_summary_against_each_annotator() {
        let mut s = AnnotationStore::new();
        let k = LandmarkKey::new("i", "l");
        s.insert(k.clone(), "A", Point3::new(0.0, 0.0, 0.0))
            .unwrap();
        s.insert(k.clone(), "B", Point3::new(4.0, 0.0, 0.0))
            .unwrap();
        let mut p = PredictionStore::new();
        p.insert("alg", k, Point3::new(2.0, 0.0, 0.0)).unwrap();
        let summary = tre_summary(&p, &s, "alg").unwrap();
        assert_eq!((summary.n, summary.median), (2, 2.0));
        assert!(tre_summary(&p, &s, "other").is_err());
    }

    #[test]
    fn ranking_order_and_ties() {
        let a = HitRateCurve::new("a", &[(0.0, 0.4), (10.0, 0.4)]).unwrap();
        let b = HitRateCurve::new("b", &[(0.0, 0.1), (10.0, 0.1)]).unwrap();
        for r in [0.0, 3.0, 50.0] {
            let ranked = threshold_ranking(&[b.clone(), a.clone()], r, None).unwrap();
            assert_eq!(ranked[0].algorithm_id, "a");
        }
        let single = threshold_ranking(std::slice::from_ref(&a), 1.0, None).unwrap();
        assert_eq!(single.len(), 1);
        assert!(threshold_ranking(&[], 1.0, None).is_err());

        let c = HitRateCurve::new("c", &[(0.0, 0.4)]).unwrap();
        let ranked = threshold_ranking(&[c.clone(), a.clone()], 1.0, None).unwrap();
        assert_eq!(ranked[0].algorithm_id, "a");
        let runtimes = BTreeMap::from([("a".to_owned(), 30.0), ("c".to_owned(), 2.0)]);
        let ranked = threshold_ranking(&[a, c], 1.0, Some(&runtimes)).unwrap();
        assert_eq!(ranked[0].algorithm_id, "c");
        assert_eq!(ranked[0].runtime, Some(2.0));
    }

    #[test]
    fn matrix_for_exact_predictions() {
        let mut s = AnnotationStore::new();
        for (l, off) in [("l1", 1.0), ("l2", 2.5)] {
            for (a, sign) in [("A", 1.0), ("B", -1.0), ("C", 0.5)] {
                s.insert(
                    LandmarkKey::new("i", l),
                    a,
                    Point3::new(sign * off, 0.0, 1.0),
                )
                .unwrap();
            }
        }
        let c = build_consensus(&s).unwrap();
        let mut p = PredictionStore::new();
        for (k, pt) in c.iter() {
            p.insert("exact", k.clone(), pt).unwrap();
        }
        let m = per_annotator_matrix(&s, &c, &p).unwrap();
        assert_eq!(m.cell_count(), 3);
        assert!(m.cells["exact"].values().all(|&v| v == 1.0));
        assert_eq!(m.spread["exact"].median, 1.0);
    }
}
