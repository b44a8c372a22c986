//! Distances, consensus landmarks, annotator distance sets and hit rates.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{
    Annotation, AnnotationStore, DistanceScope, DistanceSet, LandmarkKey, Point3, PredictionStore,
    Weights, WEIGHT_SUM_TOLERANCE,
};

/// Euclidean distance in millimeters.
pub fn euclidean_distance(p: Point3, q: Point3) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Target registration error: distance between a reference landmark and its
/// registered prediction.
pub fn tre(reference: Point3, prediction: Point3) -> f64 {
    euclidean_distance(reference, prediction)
}

/// Reference landmark for one key: the plain mean of its annotations, or the
/// reliability-weighted mean when `weights` is given.
///
/// Weights are restricted to the annotators present. If the restricted weights
/// sum to 1 within 1e-6 they are renormalized to sum to exactly 1; otherwise
/// the call fails.
pub fn consensus_landmark(annotations: &[Annotation], weights: Option<&Weights>) -> Result<Point3> {
    if annotations.is_empty() {
        return Err(Error::NoAnnotations);
    }
    let Some(weights) = weights else {
        let n = annotations.len() as f64;
        let mut sum = [0.0; 3];
        for a in annotations {
            for (s, c) in sum.iter_mut().zip(a.point.to_array()) {
                *s += c;
            }
        }
        return Ok(Point3::from_array(sum.map(|s| s / n)));
    };

    let mut restricted = Vec::with_capacity(annotations.len());
    for a in annotations {
        let &w = weights
            .get(&a.annotator_id)
            .ok_or_else(|| Error::MissingWeight(a.annotator_id.clone()))?;
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::NegativeWeight {
                annotator: a.annotator_id.clone(),
                weight: w,
            });
        }
        restricted.push(w);
    }
    let total: f64 = restricted.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::WeightSum { sum: total });
    }
    let mut acc = [0.0; 3];
    for (a, w) in annotations.iter().zip(&restricted) {
        let w = w / total;
        for (s, c) in acc.iter_mut().zip(a.point.to_array()) {
            *s += w * c;
        }
    }
    Ok(Point3::from_array(acc))
}

/// Reference landmarks, one per annotated key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConsensusStore {
    points: BTreeMap<LandmarkKey, Point3>,
}

impl ConsensusStore {
    pub fn from_points(points: BTreeMap<LandmarkKey, Point3>) -> Self {
        Self { points }
    }

    pub fn get(&self, key: &LandmarkKey) -> Option<Point3> {
        self.points.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LandmarkKey, Point3)> {
        self.points.iter().map(|(k, p)| (k, *p))
    }

    /// Keys of one image, in landmark order.
    pub fn image(&self, image_id: &str) -> impl Iterator<Item = (&LandmarkKey, Point3)> + '_ {
        let image_id = image_id.to_owned();
        self.points
            .range(LandmarkKey::new(image_id.clone(), "")..)
            .take_while(move |(k, _)| k.image_id == image_id)
            .map(|(k, p)| (k, *p))
    }

    pub fn image_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.points.keys().map(|k| k.image_id.as_str()).collect();
        ids.dedup();
        ids
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &BTreeMap<LandmarkKey, Point3> {
        &self.points
    }
}

/// Computes the consensus of every landmark, weighted iff the store carries weights.
pub fn build_consensus(store: &AnnotationStore) -> Result<ConsensusStore> {
    let points = store
        .iter()
        .map(|(key, list)| {
            consensus_landmark(list, store.weights())
                .map(|p| (key.clone(), p))
                .map_err(|e| Error::at(key, e))
        })
        .collect::<Result<_>>()?;
    Ok(ConsensusStore { points })
}

/// Distances of each annotator of `key` to the consensus of `key`, in annotator order.
pub fn annotator_distance_set(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    key: &LandmarkKey,
) -> Result<DistanceSet> {
    let values = landmark_distances(store, consensus, key)?;
    DistanceSet::new(DistanceScope::Landmark(key.clone()), values)
}

fn landmark_distances(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    key: &LandmarkKey,
) -> Result<Vec<f64>> {
    let list = store
        .get(key)
        .ok_or_else(|| Error::UnknownLandmark(key.clone()))?;
    let center = consensus
        .get(key)
        .ok_or_else(|| Error::UnknownLandmark(key.clone()))?;
    Ok(list
        .iter()
        .map(|a| euclidean_distance(a.point, center))
        .collect())
}

/// Range to pool annotator distances over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoolScope {
    Global,
    Image(String),
}

/// Multiset union of the per-landmark distance sets over the whole dataset or
/// over one image.
pub fn pool_distances(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    scope: &PoolScope,
) -> Result<DistanceSet> {
    let mut values = Vec::with_capacity(store.annotation_count());
    let mut seen = false;
    for key in store.keys() {
        if let PoolScope::Image(image) = scope {
            if &key.image_id != image {
                continue;
            }
        }
        seen = true;
        values.extend(landmark_distances(store, consensus, key)?);
    }
    let scope = match scope {
        PoolScope::Global => DistanceScope::Global,
        PoolScope::Image(image) => {
            if !seen {
                return Err(Error::UnknownImage(image.clone()));
            }
            DistanceScope::Image(image.clone())
        }
    };
    DistanceSet::new(scope, values)
}

/// `true` iff the prediction lies in the closed ball of `radius` around the
/// reference. The comparison is a plain `<=` with no tolerance.
pub fn hit_indicator(reference: Point3, prediction: Point3, radius: f64) -> Result<bool> {
    check_radius(radius)?;
    Ok(euclidean_distance(reference, prediction) <= radius)
}

fn check_radius(radius: f64) -> Result<f64> {
    if radius >= 0.0 && !radius.is_infinite() {
        Ok(radius)
    } else {
        Err(Error::InvalidRadius(radius))
    }
}

/// What to do when an algorithm has no prediction for a reference landmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    /// Count the landmark as a miss and record it.
    #[default]
    Miss,
    /// Fail.
    Strict,
}

/// Radius used for the hit test: one value for every landmark, or one per landmark.
#[derive(Debug, Clone, Copy)]
pub enum RadiusSpec<'a> {
    Uniform(f64),
    PerLandmark(&'a BTreeMap<LandmarkKey, f64>),
}

impl RadiusSpec<'_> {
    fn for_key(&self, key: &LandmarkKey) -> Result<f64> {
        match self {
            RadiusSpec::Uniform(r) => check_radius(*r),
            RadiusSpec::PerLandmark(map) => map
                .get(key)
                .copied()
                .ok_or_else(|| Error::MissingRadius(key.clone()))
                .and_then(check_radius),
        }
    }
}

impl From<f64> for RadiusSpec<'_> {
    fn from(r: f64) -> Self {
        RadiusSpec::Uniform(r)
    }
}

/// Hit count of one algorithm on one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageHitRate {
    pub image_id: String,
    pub hits: usize,
    pub landmarks: usize,
    /// Landmarks without a prediction, counted as misses.
    pub missing: Vec<LandmarkKey>,
}

impl ImageHitRate {
    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.landmarks as f64
    }
}

/// Fraction of the landmarks of `image_id` hit by `algorithm_id`.
pub fn hit_rate(
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    algorithm_id: &str,
    image_id: &str,
    radius: RadiusSpec<'_>,
    missing_policy: MissingPolicy,
) -> Result<ImageHitRate> {
    let predicted = predictions
        .algorithm(algorithm_id)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm_id.to_owned()))?;
    let mut out = ImageHitRate {
        image_id: image_id.to_owned(),
        hits: 0,
        landmarks: 0,
        missing: Vec::new(),
    };
    for (key, reference) in consensus.image(image_id) {
        out.landmarks += 1;
        let r = radius.for_key(key)?;
        match predicted.get(key) {
            Some(&p) => {
                if euclidean_distance(reference, p) <= r {
                    out.hits += 1;
                }
            }
            None => match missing_policy {
                MissingPolicy::Miss => out.missing.push(key.clone()),
                MissingPolicy::Strict => {
                    return Err(Error::MissingPrediction {
                        algorithm: algorithm_id.to_owned(),
                        key: key.clone(),
                    })
                }
            },
        }
    }
    if out.landmarks == 0 {
        return Err(Error::EmptyImage(image_id.to_owned()));
    }
    Ok(out)
}

/// One classified prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub hit: bool,
    pub distance: f64,
    pub radius: f64,
}

/// Hit/miss outcome per (algorithm, landmark).
pub type HitMatrix = BTreeMap<(String, LandmarkKey), HitRecord>;

/// Classifies every prediction of `algorithm_id` that has a consensus landmark.
pub fn classify(
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    algorithm_id: &str,
    radius: RadiusSpec<'_>,
) -> Result<HitMatrix> {
    let predicted = predictions
        .algorithm(algorithm_id)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm_id.to_owned()))?;
    let mut out = HitMatrix::new();
    for (key, &p) in predicted {
        let Some(reference) = consensus.get(key) else {
            continue;
        };
        let radius = radius.for_key(key)?;
        let distance = euclidean_distance(reference, p);
        out.insert(
            (algorithm_id.to_owned(), key.clone()),
            HitRecord {
                hit: distance <= radius,
                distance,
                radius,
            },
        );
    }
    Ok(out)
}

/// Radius of annotator `annotator_id` at every landmark they annotated: their
/// distance to the consensus.
pub fn annotator_radii(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    annotator_id: &str,
) -> Result<BTreeMap<LandmarkKey, f64>> {
    let mut radii = BTreeMap::new();
    for (key, list) in store.iter() {
        if let Some(a) = list.iter().find(|a| a.annotator_id == annotator_id) {
            let center = consensus
                .get(key)
                .ok_or_else(|| Error::UnknownLandmark(key.clone()))?;
            radii.insert(key.clone(), euclidean_distance(a.point, center));
        }
    }
    if radii.is_empty() {
        return Err(Error::UnknownAnnotator(annotator_id.to_owned()));
    }
    Ok(radii)
}

/// Hits and total over a set of landmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HitCount {
    pub hits: usize,
    pub total: usize,
}

impl HitCount {
    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

/// Counts hits of `algorithm_id` using, at each landmark annotated by
/// `annotator_id`, that annotator's own distance to the consensus as radius.
/// Landmarks the algorithm did not predict are not counted.
pub fn per_annotator_hits(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    algorithm_id: &str,
    annotator_id: &str,
) -> Result<HitCount> {
    let predicted = predictions
        .algorithm(algorithm_id)
        .ok_or_else(|| Error::UnknownAlgorithm(algorithm_id.to_owned()))?;
    let radii = annotator_radii(store, consensus, annotator_id)?;
    let mut count = HitCount::default();
    for (key, r) in &radii {
        let Some(&p) = predicted.get(key) else {
            continue;
        };
        // annotator_radii already resolved the consensus for every key
        let reference = consensus.get(key).expect("consensus for annotated key");
        count.total += 1;
        if euclidean_distance(reference, p) <= *r {
            count.hits += 1;
        }
    }
    if count.total == 0 {
        return Err(Error::AnnotatorWithoutCoverage {
            annotator: annotator_id.to_owned(),
            algorithm: algorithm_id.to_owned(),
        });
    }
    Ok(count)
}

/// Hit rate of `algorithm_id` judged against `annotator_id`'s inter-rater radii.
pub fn per_annotator_hit_rate(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    algorithm_id: &str,
    annotator_id: &str,
) -> Result<f64> {
    per_annotator_hits(store, consensus, predictions, algorithm_id, annotator_id).map(|c| c.rate())
}
