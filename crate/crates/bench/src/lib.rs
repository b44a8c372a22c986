//! Inputs shared by the benchmarks.

use hitr_core::metrics::{build_consensus, ConsensusStore};
use hitr_core::model::{AnnotationStore, DistanceSet, PredictionStore};
use hitr_core::simulate::{fit_empirical, simulate_cohort, SimulationOptions};
use hitr_core::synth::{demo_dataset, DemoConfig};

/// A cohort of `annotators` virtual raters over `images` demo-style images,
/// with the demo algorithms' predictions carried over from the demo reference.
pub fn scaled_study(
    images: usize,
    annotators: usize,
) -> (AnnotationStore, ConsensusStore, PredictionStore) {
    let demo = demo_dataset(&DemoConfig {
        images,
        min_landmarks: 20,
        max_landmarks: 50,
        ..DemoConfig::default()
    });
    let reference = build_consensus(&demo.annotations).expect("demo consensus");
    let distances = hitr_core::metrics::pool_distances(
        &demo.annotations,
        &reference,
        &hitr_core::metrics::PoolScope::Global,
    )
    .expect("demo distances");
    let dist = fit_empirical(&distances).expect("non-empty");
    let (cohort, _) = simulate_cohort(
        &reference,
        &dist,
        annotators,
        1,
        SimulationOptions::default(),
    )
    .expect("cohort");
    let consensus = build_consensus(&cohort).expect("cohort consensus");
    (cohort, consensus, demo.predictions)
}

pub fn random_distances(n: usize) -> DistanceSet {
    // xorshift keeps the bench input independent of the rand crate
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let values = (0..n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 20.0
        })
        .collect();
    DistanceSet::global(values).expect("non-negative")
}
