//! Deterministic synthetic datasets.
//!
//! [`demo_dataset`] mimics a small multi-rater study with one accurate and one
//! coarse registration algorithm. [`crossing_dataset`] pairs an algorithm that
//! is very accurate on most landmarks but fails grossly on the rest with one
//! whose errors are moderate but bounded, so their hit-rate curves cross.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};

use crate::metrics::build_consensus;
use crate::model::{AnnotationStore, LandmarkKey, Point3, PredictionStore};

pub const DEFAULT_DEMO_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoConfig {
    pub seed: u64,
    pub images: usize,
    pub min_landmarks: usize,
    pub max_landmarks: usize,
    pub annotators: usize,
    /// Per-axis standard deviation of rater noise, mm.
    pub rater_sigma: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_DEMO_SEED,
            images: 3,
            min_landmarks: 6,
            max_landmarks: 10,
            annotators: 3,
            rater_sigma: 1.5,
        }
    }
}

pub const PRECISE: &str = "precise";
pub const COARSE: &str = "coarse";

/// Annotations and predictions of the demo study.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub annotations: AnnotationStore,
    pub predictions: PredictionStore,
}

fn gaussian_offset(rng: &mut ChaCha8Rng, sigma: f64) -> Point3 {
    let n = Normal::new(0.0, sigma).expect("valid sigma");
    Point3::new(n.sample(rng), n.sample(rng), n.sample(rng))
}

fn direction(rng: &mut ChaCha8Rng, length: f64) -> Point3 {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    Point3::new(x, y, z).scaled(length)
}

/// Multi-rater annotations plus two algorithms.
///
/// `precise` is typically half a millimeter from the consensus.
/// `coarse` has a few millimeters of error on most landmarks and misses about
/// a third of them by 30 to 45 mm.
pub fn demo_dataset(config: &DemoConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let width = config.annotators.to_string().len();
    let mut annotations = AnnotationStore::new();
    for image in 1..=config.images {
        let count = rng.random_range(config.min_landmarks..=config.max_landmarks);
        for l in 1..=count {
            let key = LandmarkKey::new(format!("case{image:02}"), format!("L{l:02}"));
            let truth = Point3::new(
                rng.random_range(20.0..180.0),
                rng.random_range(20.0..220.0),
                rng.random_range(10.0..150.0),
            );
            for v in 1..=config.annotators {
                let p = truth.translated(gaussian_offset(&mut rng, config.rater_sigma));
                annotations
                    .insert(key.clone(), format!("rater{v:0width$}"), p)
                    .expect("unique annotator");
            }
        }
    }
    let consensus = build_consensus(&annotations).expect("unweighted consensus");
    let mut predictions = PredictionStore::new();
    for (key, c) in consensus.iter() {
        let precise = c.translated(gaussian_offset(&mut rng, 0.3));
        let mut coarse = c.translated(gaussian_offset(&mut rng, 3.0));
        if rng.random_bool(0.3) {
            let length = rng.random_range(30.0..45.0);
            coarse = coarse.translated(direction(&mut rng, length));
        }
        predictions
            .insert(PRECISE, key.clone(), precise)
            .expect("unique");
        predictions
            .insert(COARSE, key.clone(), coarse)
            .expect("unique");
    }
    predictions.set_runtimes(Some(BTreeMap::from([
        (PRECISE.to_owned(), 95.0),
        (COARSE.to_owned(), 4.0),
    ])));
    Dataset {
        annotations,
        predictions,
    }
}

pub const SHARP: &str = "sharp";
pub const BROAD: &str = "broad";

/// Two images of ten landmarks, three raters, two algorithms.
///
/// `sharp` is 0.3 mm off on six landmarks per image and 30 to 39 mm off on the
/// other four. `broad` is off by 1.5 to 5.5 mm everywhere. Up to 1.5 mm only
/// `sharp` hits anything; `broad` passes its 0.6 plateau at about 4 mm and
/// reaches 1.0 at 5.5 mm.
pub fn crossing_dataset() -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut annotations = AnnotationStore::new();
    for image in ["caseA", "caseB"] {
        for l in 0..10 {
            let key = LandmarkKey::new(image, format!("L{l:02}"));
            let truth = Point3::new(
                10.0 * l as f64,
                50.0,
                if image == "caseA" { 0.0 } else { 80.0 },
            );
            for v in ["r1", "r2", "r3"] {
                let p = truth.translated(gaussian_offset(&mut rng, 0.8));
                annotations
                    .insert(key.clone(), v, p)
                    .expect("unique annotator");
            }
        }
    }
    let consensus = build_consensus(&annotations).expect("unweighted consensus");
    let mut predictions = PredictionStore::new();
    for (i, (key, c)) in consensus.iter().enumerate() {
        let l = i % 10;
        let sharp_error = if l < 6 {
            0.3
        } else {
            30.0 + 3.0 * (l - 6) as f64
        };
        let broad_error = 1.5 + 4.0 * l as f64 / 9.0;
        predictions
            .insert(
                SHARP,
                key.clone(),
                c.translated(direction(&mut rng, sharp_error)),
            )
            .expect("unique");
        predictions
            .insert(
                BROAD,
                key.clone(),
                c.translated(direction(&mut rng, broad_error)),
            )
            .expect("unique");
    }
    predictions.set_runtimes(Some(BTreeMap::from([
        (SHARP.to_owned(), 310.0),
        (BROAD.to_owned(), 12.0),
    ])));
    Dataset {
        annotations,
        predictions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_store;

    #[test]
    fn demo_shape() {
        let d = demo_dataset(&DemoConfig::default());
        let images = d.annotations.image_ids();
        assert_eq!(images.len(), 3);
        for image in images {
            let n = d.annotations.keys().filter(|k| k.image_id == image).count();
            assert!((6..=10).contains(&n));
        }
        assert_eq!(d.annotations.annotator_ids().len(), 3);
        assert_eq!(d.predictions.algorithm_ids().count(), 2);
        assert!(validate_store(&d.annotations).is_empty());
        assert!(validate_store(&d.predictions).is_empty());
        assert_eq!(d, demo_dataset(&DemoConfig::default()));
    }

    #[test]
    fn crossing_fixture_is_complete() {
        let d = crossing_dataset();
        assert_eq!(d.annotations.len(), 20);
        assert_eq!(d.predictions.len(), 40);
    }
}
