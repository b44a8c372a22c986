//! Seeded virtual-annotator cohorts.
//!
//! Each virtual annotator perturbs every reference landmark independently per
//! axis: it draws a magnitude from the empirical inter-rater distances (with
//! replacement), a fair random sign, and scales the product by its own bias
//! `beta ~ U(0.7, 1.3)`.
//!
//! All randomness derives from one master seed. Annotator `i` owns ChaCha
//! stream `i` of that seed, from which it draws its bias and the seed of its
//! noise stream, so any annotator can be regenerated on its own.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metrics::ConsensusStore;
use crate::model::{AnnotationStore, DistanceSet, Point3};

pub const BETA_MIN: f64 = 0.7;
pub const BETA_MAX: f64 = 1.3;
pub const DEFAULT_ANNOTATORS: usize = 20;

/// Observed inter-rater distances to resample from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Uniform draw with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.values[rng.random_range(0..self.values.len())]
    }
}

pub fn fit_empirical(d: &DistanceSet) -> Result<EmpiricalDistribution> {
    if d.is_empty() {
        return Err(Error::EmptyDistanceSet);
    }
    Ok(EmpiricalDistribution {
        values: d.values().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualAnnotator {
    pub annotator_id: String,
    pub beta: f64,
    pub stream_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimulationOptions {
    /// Divide each per-axis offset by sqrt(3) so the expected 3D displacement
    /// matches the sampled distance rather than exceeding it.
    pub normalize_sqrt3: bool,
}

/// Per-axis offsets one annotator applies, before adding them to the reference.
pub fn annotator_offsets(
    reference: &ConsensusStore,
    dist: &EmpiricalDistribution,
    annotator: &VirtualAnnotator,
    options: SimulationOptions,
) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(annotator.stream_seed);
    let scale = if options.normalize_sqrt3 {
        annotator.beta / 3f64.sqrt()
    } else {
        annotator.beta
    };
    (0..reference.len())
        .map(|_| {
            [0; 3].map(|_| {
                let magnitude = dist.sample(&mut rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * scale * magnitude
            })
        })
        .collect()
}

/// One annotation per reference landmark from a single virtual annotator.
pub fn simulate_annotator(
    reference: &ConsensusStore,
    dist: &EmpiricalDistribution,
    annotator: &VirtualAnnotator,
    options: SimulationOptions,
) -> AnnotationStore {
    let offsets = annotator_offsets(reference, dist, annotator, options);
    let mut store = AnnotationStore::new();
    for ((key, p), offset) in reference.iter().zip(offsets) {
        let point = p.translated(Point3::from_array(offset));
        store
            .insert(key.clone(), annotator.annotator_id.clone(), point)
            .expect("one annotation per landmark");
    }
    store
}

/// Derives annotator `index` of the cohort seeded by `master_seed`.
pub fn virtual_annotator(master_seed: u64, index: usize, cohort_size: usize) -> VirtualAnnotator {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index as u64);
    let beta = rng.random_range(BETA_MIN..=BETA_MAX);
    let stream_seed = rng.next_u64();
    let width = cohort_size.to_string().len();
    VirtualAnnotator {
        annotator_id: format!("sim{:0width$}", index + 1),
        beta,
        stream_seed,
    }
}

/// Simulates `n_annotators` virtual annotators over every reference landmark.
pub fn simulate_cohort(
    reference: &ConsensusStore,
    dist: &EmpiricalDistribution,
    n_annotators: usize,
    master_seed: u64,
    options: SimulationOptions,
) -> Result<(AnnotationStore, Vec<VirtualAnnotator>)> {
    if n_annotators == 0 {
        return Err(Error::NoAnnotators);
    }
    let annotators: Vec<_> = (0..n_annotators)
        .map(|i| virtual_annotator(master_seed, i, n_annotators))
        .collect();
    let mut store = AnnotationStore::new();
    for annotator in &annotators {
        store.merge(&simulate_annotator(reference, dist, annotator, options))?;
    }
    Ok((store, annotators))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::metrics::tre;
    use crate::model::LandmarkKey;

    fn reference(n: usize) -> ConsensusStore {
        let points: BTreeMap<_, _> = (0..n)
            .map(|i| {
                let f = i as f64;
                (
                    LandmarkKey::new(format!("img{}", i % 3), format!("l{i:04}")),
                    Point3::new(f, 2.0 * f, -f),
                )
            })
            .collect();
        ConsensusStore::from_points(points)
    }

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        fit_empirical(&DistanceSet::global(v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn fit_requires_values() {
        assert!(fit_empirical(&DistanceSet::global(vec![]).unwrap()).is_err());
        let d = dist(&[2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| d.sample(&mut rng) == 2.0));
        let d = dist(&[0.0, 24.0]);
        let draws: Vec<f64> = (0..200).map(|_| d.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&v| v == 0.0 || v == 24.0));
        assert!(draws.contains(&0.0) && draws.contains(&24.0));
    }

    #[test]
    fn constant_magnitude_lands_on_cube_corners() {
        let r = reference(50);
        let a = VirtualAnnotator {
            annotator_id: "v".into(),
            beta: 1.0,
            stream_seed: 9,
        };
        let s = simulate_annotator(&r, &dist(&[2.0]), &a, SimulationOptions::default());
        for (key, list) in s.iter() {
            let p = list[0].point;
            let c = r.get(key).unwrap();
            for (pc, cc) in p.to_array().into_iter().zip(c.to_array()) {
                assert!(((pc - cc).abs() - 2.0).abs() < 1e-12);
            }
            assert!((tre(c, p) - 2.0 * 3f64.sqrt()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_noise_reproduces_reference() {
        let r = reference(20);
        let (s, _) =
            simulate_cohort(&r, &dist(&[0.0]), 3, 5, SimulationOptions::default()).unwrap();
        for (key, list) in s.iter() {
            assert!(list.iter().all(|a| a.point == r.get(key).unwrap()));
        }
    }

    #[test]
    fn deterministic_and_regenerable() {
        let r = reference(30);
        let d = dist(&[0.5, 1.0, 4.0]);
        let opts = SimulationOptions::default();
        let (s1, a1) = simulate_cohort(&r, &d, 5, 42, opts).unwrap();
        let (s2, a2) = simulate_cohort(&r, &d, 5, 42, opts).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(a1, a2);
        let alone = simulate_annotator(&r, &d, &virtual_annotator(42, 3, 5), opts);
        for (key, list) in alone.iter() {
            let cohort = s1.get(key).unwrap();
            assert!(cohort.contains(&list[0]));
        }
        let (s3, _) = simulate_cohort(&r, &d, 5, 43, opts).unwrap();
        assert_ne!(s1, s3);
    }

    #[test]
    fn cohort_shape() {
        let r = reference(10);
        let (s, a) =
            simulate_cohort(&r, &dist(&[1.0]), 20, 0, SimulationOptions::default()).unwrap();
        assert_eq!(s.annotation_count(), 200);
        assert_eq!(a.len(), 20);
        assert_eq!(a[0].annotator_id, "sim01");
        assert!(crate::model::validate_store(&s).is_empty());
        assert!(simulate_cohort(&r, &dist(&[1.0]), 0, 0, SimulationOptions::default()).is_err());
    }

    #[test]
    fn sqrt3_option_shrinks_offsets() {
        let r = reference(10);
        let d = dist(&[3.0]);
        let a = VirtualAnnotator {
            annotator_id: "v".into(),
            beta: 1.0,
            stream_seed: 1,
        };
        let off = annotator_offsets(
            &r,
            &d,
            &a,
            SimulationOptions {
                normalize_sqrt3: true,
            },
        );
        for o in off {
            assert!(o
                .iter()
                .all(|c| (c.abs() - 3.0 / 3f64.sqrt()).abs() < 1e-12));
        }
    }
}
