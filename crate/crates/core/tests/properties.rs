//! Invariants checked over generated inputs.

mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::*;
use hitr_core::analysis::{pearson_xy, threshold_ranking};
use hitr_core::io::{
    annotations_csv, predictions_csv, read_annotations, read_predictions, read_weights,
};
use hitr_core::metrics::{
    build_consensus, consensus_landmark, hit_indicator, hit_rate, pool_distances, tre,
    MissingPolicy, PoolScope, RadiusSpec,
};
use hitr_core::model::{Annotation, AnnotationStore, DistanceSet, LandmarkKey, Point3};
use hitr_core::radii::{
    build_curve, mu_grid, radius_from_mu, robust_stats, Aggregation, CurveSchedule, HitRateCurve,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coord() -> impl Strategy<Value = f64> {
    -1000.0..1000.0f64
}

fn point() -> impl Strategy<Value = Point3> {
    (coord(), coord(), coord()).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn global_schedule(
    store: &AnnotationStore,
    consensus: &hitr_core::ConsensusStore,
) -> CurveSchedule {
    let mus = mu_grid(-2.0, 30.0, 32).unwrap();
    CurveSchedule::global(store, consensus, &mus).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hit_rate_is_monotone_and_bounded(seed in any::<u64>(), mut radii in prop::collection::vec(0.0..50.0f64, 2..20)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = random_store(&mut rng, 3, 8, 4);
        let preds = random_predictions(&mut rng, &store, &["alg"]);
        let c = build_consensus(&store).unwrap();
        radii.sort_by(f64::total_cmp);
        for image in c.image_ids() {
            let mut last = 0.0;
            for &r in &radii {
                let h = hit_rate(&c, &preds, "alg", image, RadiusSpec::Uniform(r), MissingPolicy::Miss).unwrap().rate();
                prop_assert!((0.0..=1.0).contains(&h));
                prop_assert!(h >= last);
                last = h;
            }
        }
        let curve = build_curve(&c, &preds, "alg", &global_schedule(&store, &c), MissingPolicy::Miss, Aggregation::ImageMean).unwrap().curve;
        for w in curve.samples().windows(2) {
            prop_assert!(w[0].radius < w[1].radius);
            prop_assert!(w[0].hit_rate <= w[1].hit_rate);
        }
    }

    #[test]
    fn two_annotators_sit_half_apart(a in point(), b in point()) {
        let list = [
            Annotation { annotator_id: "A".into(), point: a },
            Annotation { annotator_id: "B".into(), point: b },
        ];
        let c = consensus_landmark(&list, None).unwrap();
        let half = tre(a, b) / 2.0;
        prop_assert!((tre(a, c) - half).abs() <= 1e-9 * (1.0 + half));
        prop_assert!((tre(b, c) - half).abs() <= 1e-9 * (1.0 + half));
    }

    #[test]
    fn equal_weights_reduce_to_the_mean(points in prop::collection::vec(point(), 1..8)) {
        let list: Vec<Annotation> = points
            .iter()
            .enumerate()
            .map(|(i, p)| Annotation { annotator_id: format!("a{i}"), point: *p })
            .collect();
        let w = 1.0 / points.len() as f64;
        let weights: BTreeMap<String, f64> = list.iter().map(|a| (a.annotator_id.clone(), w)).collect();
        let plain = consensus_landmark(&list, None).unwrap();
        let weighted = consensus_landmark(&list, Some(&weights)).unwrap();
        let oracle = oracle_mean(&points);
        for (x, y) in plain.to_array().into_iter().zip(weighted.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        for (x, y) in plain.to_array().into_iter().zip(oracle.to_array()) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn hits_agree_with_tre(p in point(), q in point(), r in 0.0..2000.0f64) {
        prop_assert_eq!(hit_indicator(p, q, r).unwrap(), tre(p, q) <= r);
        prop_assert!(hit_indicator(p, p, 0.0).unwrap());
    }

    #[test]
    fn evaluation_is_translation_invariant(seed in any::<u64>(), t in point()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // integer coordinates keep translated distances exact
        let store = random_store(&mut rng, 3, 6, 4).map_points(|p| Point3::new(p.x.round(), p.y.round(), p.z.round()));
        let preds = random_predictions(&mut rng, &store, &["a", "b"]).map_points(|p| Point3::new(p.x.round(), p.y.round(), p.z.round()));
        let t = Point3::new(t.x.round(), t.y.round(), t.z.round());
        let moved = store.map_points(|p| p.translated(t));
        let moved_preds = preds.map_points(|p| p.translated(t));
        let (c, mc) = (build_consensus(&store).unwrap(), build_consensus(&moved).unwrap());
        let d = pool_distances(&store, &c, &PoolScope::Global).unwrap();
        let md = pool_distances(&moved, &mc, &PoolScope::Global).unwrap();
        let (s, ms) = (robust_stats(&d).unwrap(), robust_stats(&md).unwrap());
        prop_assert!((s.median - ms.median).abs() <= 1e-9 * (1.0 + s.median));
        for alg in ["a", "b"] {
            let a = build_curve(&c, &preds, alg, &global_schedule(&store, &c), MissingPolicy::Miss, Aggregation::ImageMean).unwrap().curve;
            let b = build_curve(&mc, &moved_preds, alg, &global_schedule(&moved, &mc), MissingPolicy::Miss, Aggregation::ImageMean).unwrap().curve;
            prop_assert_eq!(a.samples().len(), b.samples().len());
            for (x, y) in a.samples().iter().zip(b.samples()) {
                prop_assert!((x.radius - y.radius).abs() <= 1e-9 * (1.0 + x.radius));
            }
        }
    }

    #[test]
    fn radius_scales_with_coordinates(values in prop::collection::vec(0.0..100.0f64, 1..60), s in 0.1..10.0f64, mu in -2.0..30.0f64) {
        let d = DistanceSet::global(values.clone()).unwrap();
        let scaled = DistanceSet::global(values.iter().map(|v| v * s).collect()).unwrap();
        let r = radius_from_mu(&d, mu).unwrap();
        let rs = radius_from_mu(&scaled, mu).unwrap();
        prop_assert!((rs - s * r).abs() <= 1e-9 * (1.0 + rs.abs()));
    }

    #[test]
    fn radius_is_non_decreasing_in_mu(values in prop::collection::vec(0.0..100.0f64, 1..60), mut mus in prop::collection::vec(-5.0..40.0f64, 2..10)) {
        let d = DistanceSet::global(values).unwrap();
        mus.sort_by(f64::total_cmp);
        let radii: Vec<f64> = mus.iter().map(|&m| radius_from_mu(&d, m).unwrap()).collect();
        prop_assert!(radii.iter().all(|r| *r >= 0.0));
        prop_assert!(radii.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn median_ignores_order_and_extreme_tails(mut values in prop::collection::vec(0.0..100.0f64, 3..80), seed in any::<u64>()) {
        let base = robust_stats(&DistanceSet::global(values.clone()).unwrap()).unwrap();
        // permuting
        use rand::seq::SliceRandom;
        values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = robust_stats(&DistanceSet::global(values.clone()).unwrap()).unwrap();
        prop_assert_eq!(base, shuffled);
        // moving the largest value further out leaves the median alone
        let (i, _) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        values[i] *= 1000.0;
        let stretched = robust_stats(&DistanceSet::global(values.clone()).unwrap()).unwrap();
        prop_assert_eq!(base.median, stretched.median);
        prop_assert!(rel_close(base.median, oracle_median(&values), 1e-12));
    }

    #[test]
    fn ranking_survives_unit_change(rates in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 4), 2..6), s in 0.1..10.0f64, r in 0.0..5.0f64) {
        let radii = [0.5, 1.5, 3.0, 4.5];
        let build = |scale: f64| -> Vec<HitRateCurve> {
            rates.iter().enumerate().map(|(i, h)| {
                let mut h = h.clone();
                h.sort_by(f64::total_cmp);
                let pts: Vec<(f64, f64)> = radii.iter().map(|r| r * scale).zip(h).collect();
                HitRateCurve::new(format!("alg{i}"), &pts).unwrap()
            }).collect()
        };
        let a = threshold_ranking(&build(1.0), r, None).unwrap();
        let b = threshold_ranking(&build(s), r * s, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.hit_rate - y.hit_rate).abs() <= 1e-9);
        }
        let distinct = a.windows(2).all(|w| (w[0].hit_rate - w[1].hit_rate).abs() > 1e-9);
        if distinct {
            let ids = |v: &[hitr_core::analysis::RankingEntry]| v.iter().map(|e| e.algorithm_id.clone()).collect::<Vec<_>>();
            prop_assert_eq!(ids(&a), ids(&b));
        }
    }

    #[test]
    fn pearson_is_symmetric_and_affine_invariant(xs in prop::collection::vec(-50.0..50.0f64, 3..40), a in 0.5..4.0f64, b in -10.0..10.0f64) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.3 + (i as f64 * 1.7).sin() * 4.0).collect();
        if let (Ok(r1), Ok(r2)) = (pearson_xy(&xs, &ys), pearson_xy(&ys, &xs)) {
            prop_assert!((r1 - r2).abs() <= 1e-12);
            let moved: Vec<f64> = ys.iter().map(|y| a * y + b).collect();
            let r3 = pearson_xy(&xs, &moved).unwrap();
            prop_assert!((r1 - r3).abs() <= 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r1));
        }
    }

    #[test]
    fn annotations_round_trip_through_csv(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = random_store(&mut rng, 3, 5, 4);
        let text = annotations_csv(&store);
        let back = read_annotations(text.as_bytes(), Path::new("mem")).unwrap();
        prop_assert_eq!(&back, &store);
        prop_assert_eq!(annotations_csv(&back), text);
    }

    #[test]
    fn predictions_round_trip_through_csv(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let store = random_store(&mut rng, 2, 5, 2);
        let preds = random_predictions(&mut rng, &store, &["a", "b,c", "q\"uote"]);
        let text = predictions_csv(&preds);
        let back = read_predictions(text.as_bytes(), Path::new("mem")).unwrap();
        prop_assert_eq!(predictions_csv(&back), text);
        for (alg, key, p) in preds.iter() {
            prop_assert_eq!(back.get(alg, key), Some(p));
        }
    }

    #[test]
    fn weights_round_trip_through_csv(ws in prop::collection::btree_map("[a-z][a-z0-9_]{0,6}", 0.0..5.0f64, 1..6)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        hitr_core::io::write_weights(&ws, &path).unwrap();
        let back = read_weights(std::fs::read(&path).unwrap().as_slice(), &path).unwrap();
        prop_assert_eq!(back, ws);
    }
}

#[test]
fn key_display_is_stable() {
    assert_eq!(LandmarkKey::new("a", "b").to_string(), "a/b");
}
