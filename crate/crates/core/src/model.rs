//! Domain types shared by every stage of the evaluation.
//!
//! All coordinates are physical millimeters. Stores are ordered maps keyed
//! lexicographically by `(image_id, landmark_id)` so every downstream report
//! iterates in the same order regardless of input order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance on the sum of the reliability weights restricted to one landmark.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-6;

/// Reliability weight per annotator id.
pub type Weights = BTreeMap<String, f64>;

/// A landmark position in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn translated(self, by: Point3) -> Self {
        Self::new(self.x + by.x, self.y + by.y, self.z + by.z)
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl fmt::Display for Point3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Identifies landmark `landmark_id` in image `image_id`.
///
/// The derived ordering is lexicographic by image, then landmark.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LandmarkKey {
    pub image_id: String,
    pub landmark_id: String,
}

impl LandmarkKey {
    pub fn new(image_id: impl Into<String>, landmark_id: impl Into<String>) -> Self {
        Self {
            image_id: image_id.into(),
            landmark_id: landmark_id.into(),
        }
    }
}

impl fmt::Display for LandmarkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.image_id, self.landmark_id)
    }
}

/// One rater's position for one landmark.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub annotator_id: String,
    pub point: Point3,
}

/// A single invariant violation found by `validate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: Option<LandmarkKey>,
    pub message: String,
}

impl Violation {
    fn at(key: &LandmarkKey, message: impl Into<String>) -> Self {
        Self {
            key: Some(key.clone()),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            key: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(key) => write!(f, "{key}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// All annotations, indexed by landmark, plus optional reliability weights.
///
/// Annotations of one landmark are kept sorted by annotator id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationStore {
    entries: BTreeMap<LandmarkKey, Vec<Annotation>>,
    weights: Option<Weights>,
}

impl AnnotationStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one annotation. A second annotation by the same annotator for the
    /// same landmark is rejected rather than overwritten.
    pub fn insert(
        &mut self,
        key: LandmarkKey,
        annotator_id: impl Into<String>,
        point: Point3,
    ) -> Result<()> {
        let annotator_id = annotator_id.into();
        let list = self.entries.entry(key.clone()).or_default();
        match list.binary_search_by(|a| a.annotator_id.as_str().cmp(&annotator_id)) {
            Ok(_) => Err(Error::DuplicateAnnotation {
                key,
                annotator: annotator_id,
            }),
            Err(pos) => {
                list.insert(
                    pos,
                    Annotation {
                        annotator_id,
                        point,
                    },
                );
                Ok(())
            }
        }
    }

    /// Adds every annotation of `other`. Weights of `other` are ignored.
    pub fn merge(&mut self, other: &AnnotationStore) -> Result<()> {
        for (key, list) in other.iter() {
            for a in list {
                self.insert(key.clone(), a.annotator_id.clone(), a.point)?;
            }
        }
        Ok(())
    }

    pub fn set_weights(&mut self, weights: Option<Weights>) {
        self.weights = weights;
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn weights(&self) -> Option<&Weights> {
        self.weights.as_ref()
    }

    pub fn get(&self, key: &LandmarkKey) -> Option<&[Annotation]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn contains(&self, key: &LandmarkKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LandmarkKey, &[Annotation])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &LandmarkKey> {
        self.entries.keys()
    }

    /// Number of landmarks.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of annotations over all landmarks.
    pub fn annotation_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn image_ids(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|k| k.image_id.as_str()).collect()
    }

    pub fn annotator_ids(&self) -> BTreeSet<&str> {
        self.entries
            .values()
            .flatten()
            .map(|a| a.annotator_id.as_str())
            .collect()
    }

    /// Returns a copy with every annotation mapped through `f`.
    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, list)| {
                let list = list
                    .iter()
                    .map(|a| Annotation {
                        annotator_id: a.annotator_id.clone(),
                        point: f(a.point),
                    })
                    .collect();
                (k.clone(), list)
            })
            .collect();
        Self {
            entries,
            weights: self.weights.clone(),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if let Some(weights) = &self.weights {
            for (annotator, &w) in weights {
                if !(w.is_finite() && w >= 0.0) {
                    out.push(Violation::global(format!(
                        "annotator `{annotator}` has invalid weight {w}"
                    )));
                }
            }
        }
        for (key, list) in &self.entries {
            if key.image_id.is_empty() || key.landmark_id.is_empty() {
                out.push(Violation::at(key, "empty identifier"));
            }
            if list.is_empty() {
                out.push(Violation::at(key, "no annotations"));
            }
            for pair in list.windows(2) {
                if pair[0].annotator_id == pair[1].annotator_id {
                    out.push(Violation::at(
                        key,
                        format!("annotator `{}` appears twice", pair[0].annotator_id),
                    ));
                }
            }
            for a in list {
                if a.annotator_id.is_empty() {
                    out.push(Violation::at(key, "empty annotator id"));
                }
                if !a.point.is_finite() {
                    out.push(Violation::at(
                        key,
                        format!(
                            "annotator `{}` has non-finite point {}",
                            a.annotator_id, a.point
                        ),
                    ));
                }
            }
            if let Some(weights) = &self.weights {
                let mut sum = 0.0;
                let mut complete = true;
                for a in list {
                    match weights.get(&a.annotator_id) {
                        Some(w) => sum += w,
                        None => {
                            complete = false;
                            out.push(Violation::at(
                                key,
                                format!("annotator `{}` has no weight", a.annotator_id),
                            ));
                        }
                    }
                }
                if complete && (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    out.push(Violation::at(
                        key,
                        format!("weights sum to {sum}, expected 1 within 1e-6"),
                    ));
                }
            }
        }
        out
    }
}

/// Registered landmark positions per algorithm, plus optional runtimes in seconds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionStore {
    entries: BTreeMap<String, BTreeMap<LandmarkKey, Point3>>,
    runtimes: Option<BTreeMap<String, f64>>,
}

impl PredictionStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        algorithm_id: impl Into<String>,
        key: LandmarkKey,
        point: Point3,
    ) -> Result<()> {
        let algorithm_id = algorithm_id.into();
        let per_algorithm = self.entries.entry(algorithm_id.clone()).or_default();
        if per_algorithm.contains_key(&key) {
            return Err(Error::DuplicatePrediction {
                key,
                algorithm: algorithm_id,
            });
        }
        per_algorithm.insert(key, point);
        Ok(())
    }

    pub fn get(&self, algorithm_id: &str, key: &LandmarkKey) -> Option<Point3> {
        self.entries.get(algorithm_id)?.get(key).copied()
    }

    pub fn algorithm(&self, algorithm_id: &str) -> Option<&BTreeMap<LandmarkKey, Point3>> {
        self.entries.get(algorithm_id)
    }

    pub fn algorithm_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LandmarkKey, Point3)> {
        self.entries
            .iter()
            .flat_map(|(alg, m)| m.iter().map(move |(k, p)| (alg.as_str(), k, *p)))
    }

    /// Number of predictions over all algorithms.
    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn runtimes(&self) -> Option<&BTreeMap<String, f64>> {
        self.runtimes.as_ref()
    }

    pub fn set_runtimes(&mut self, runtimes: Option<BTreeMap<String, f64>>) {
        self.runtimes = runtimes;
    }

    pub fn map_points(&self, f: impl Fn(Point3) -> Point3) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(alg, m)| {
                (
                    alg.clone(),
                    m.iter().map(|(k, p)| (k.clone(), f(*p))).collect(),
                )
            })
            .collect();
        Self {
            entries,
            runtimes: self.runtimes.clone(),
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (alg, m) in &self.entries {
            if alg.is_empty() {
                out.push(Violation::global("empty algorithm id"));
            }
            for (key, p) in m {
                if key.image_id.is_empty() || key.landmark_id.is_empty() {
                    out.push(Violation::at(key, "empty identifier"));
                }
                if !p.is_finite() {
                    out.push(Violation::at(
                        key,
                        format!("algorithm `{alg}` has non-finite prediction {p}"),
                    ));
                }
            }
        }
        if let Some(runtimes) = &self.runtimes {
            for (alg, &s) in runtimes {
                if !(s.is_finite() && s >= 0.0) {
                    out.push(Violation::global(format!(
                        "algorithm `{alg}` has invalid runtime {s}"
                    )));
                }
            }
        }
        out
    }
}

/// Either store kind, for [`validate_store`].
#[derive(Debug, Clone, Copy)]
pub enum StoreRef<'a> {
    Annotations(&'a AnnotationStore),
    Predictions(&'a PredictionStore),
}

impl<'a> From<&'a AnnotationStore> for StoreRef<'a> {
    fn from(s: &'a AnnotationStore) -> Self {
        StoreRef::Annotations(s)
    }
}

impl<'a> From<&'a PredictionStore> for StoreRef<'a> {
    fn from(s: &'a PredictionStore) -> Self {
        StoreRef::Predictions(s)
    }
}

/// Lists every invariant violation of a store; empty when the store is valid.
pub fn validate_store<'a>(store: impl Into<StoreRef<'a>>) -> Vec<Violation> {
    match store.into() {
        StoreRef::Annotations(s) => s.validate(),
        StoreRef::Predictions(s) => s.validate(),
    }
}

/// Which part of the dataset a [`DistanceSet`] was pooled from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistanceScope {
    Landmark(LandmarkKey),
    Image(String),
    Global,
}

/// A multiset of non-negative distances in millimeters. Duplicates are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSet {
    scope: DistanceScope,
    values: Vec<f64>,
}

impl DistanceSet {
    pub fn new(scope: DistanceScope, values: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidDistance(bad));
        }
        Ok(Self { scope, values })
    }

    /// Shorthand for a globally scoped set.
    pub fn global(values: Vec<f64>) -> Result<Self> {
        Self::new(DistanceScope::Global, values)
    }

    pub fn scope(&self) -> &DistanceScope {
        &self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
