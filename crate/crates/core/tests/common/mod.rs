//! Random instance generators and brute-force oracles shared by the
//! integration tests. Oracles deliberately avoid the library's code paths.

#![allow(dead_code)]

use std::collections::BTreeMap;

use hitr_core::model::{AnnotationStore, LandmarkKey, Point3, PredictionStore};
use rand::Rng;

pub fn rand_point<R: Rng>(rng: &mut R, span: f64) -> Point3 {
    Point3::new(
        rng.random_range(-span..span),
        rng.random_range(-span..span),
        rng.random_range(-span..span),
    )
}

/// Up to `max_images` images x `max_landmarks` landmarks x `max_annotators`
/// annotators, each landmark annotated by a random non-empty subset.
pub fn random_store<R: Rng>(
    rng: &mut R,
    max_images: usize,
    max_landmarks: usize,
    max_annotators: usize,
) -> AnnotationStore {
    let mut store = AnnotationStore::new();
    let images = rng.random_range(1..=max_images);
    for i in 0..images {
        let landmarks = rng.random_range(1..=max_landmarks);
        for l in 0..landmarks {
            let key = LandmarkKey::new(format!("img{i}"), format!("lm{l}"));
            let center = rand_point(rng, 100.0);
            let spread = rng.random_range(0.1..6.0);
            let n = rng.random_range(1..=max_annotators);
            for v in 0..n {
                let p = center.translated(rand_point(rng, spread));
                store.insert(key.clone(), format!("ann{v}"), p).unwrap();
            }
        }
    }
    store
}

pub fn oracle_distance(p: Point3, q: Point3) -> f64 {
    let a = [p.x, p.y, p.z];
    let b = [q.x, q.y, q.z];
    let mut total = 0.0;
    for i in 0..3 {
        total += (a[i] - b[i]).powi(2);
    }
    total.sqrt()
}

pub fn oracle_mean(points: &[Point3]) -> Point3 {
    let n = points.len() as f64;
    let x: f64 = points.iter().map(|p| p.x).sum();
    let y: f64 = points.iter().map(|p| p.y).sum();
    let z: f64 = points.iter().map(|p| p.z).sum();
    Point3::new(x / n, y / n, z / n)
}

pub fn oracle_consensus(store: &AnnotationStore) -> BTreeMap<LandmarkKey, Point3> {
    store
        .iter()
        .map(|(k, list)| {
            let pts: Vec<Point3> = list.iter().map(|a| a.point).collect();
            (k.clone(), oracle_mean(&pts))
        })
        .collect()
}

/// Predictions at random distances from the oracle consensus, some landmarks
/// hit exactly.
pub fn random_predictions<R: Rng>(
    rng: &mut R,
    store: &AnnotationStore,
    algorithms: &[&str],
) -> PredictionStore {
    let reference = oracle_consensus(store);
    let mut p = PredictionStore::new();
    for alg in algorithms {
        let scale = rng.random_range(0.5..8.0);
        for (k, c) in &reference {
            let offset = if rng.random_bool(0.1) {
                Point3::default()
            } else {
                rand_point(rng, scale)
            };
            p.insert(*alg, k.clone(), c.translated(offset)).unwrap();
        }
    }
    p
}

pub fn oracle_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn oracle_mad(values: &[f64]) -> f64 {
    let m = oracle_median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    oracle_median(&dev)
}

/// Hits / landmarks of one image, counting by hand.
pub fn oracle_image_hits(
    reference: &BTreeMap<LandmarkKey, Point3>,
    predictions: &PredictionStore,
    alg: &str,
    image: &str,
    radius: f64,
) -> (usize, usize) {
    let mut hits = 0;
    let mut total = 0;
    for (k, c) in reference {
        if k.image_id != image {
            continue;
        }
        total += 1;
        if let Some(p) = predictions.get(alg, k) {
            if oracle_distance(*c, p) <= radius {
                hits += 1;
            }
        }
    }
    (hits, total)
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
