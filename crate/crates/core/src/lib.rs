//! Label-noise-aware landmark hit rate (HitR) evaluation for image registration.
//!
//! Landmarks annotated by several raters are averaged into a consensus
//! reference. The spread of each rater around that consensus defines the
//! radius of a ball (the region of interest) around every landmark; a
//! registered landmark that lands inside the ball is a hit. Hit rates are
//! reported per image, per rater, and as curves over a sweep of radii
//! extrapolated with `median + mu * MAD` from the inter-rater distances.
//!
//! Module map:
//!
//! - [`model`]: points, keys, annotation and prediction stores, validation.
//! - [`metrics`]: TRE, consensus landmarks, distance sets, hit indicator and hit rates.
//! - [`radii`]: median/MAD radius schedules, hit-rate curves, interpolation, crossings.
//! - [`simulate`]: seeded virtual-annotator cohorts.
//! - [`analysis`]: point-biserial correlation, TRE summaries, threshold rankings.
//! - [`io`]: CSV formats, canonical JSON report, SVG charts.
//! - [`evaluate`]: the end-to-end evaluation that produces an [`io::EvaluationReport`].
//! - [`synth`]: deterministic synthetic datasets for demos, tests and benches.

pub mod analysis;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod metrics;
pub mod model;
pub mod radii;
pub mod simulate;
pub mod synth;

pub use error::{Error, Result};
pub use metrics::{ConsensusStore, HitMatrix, MissingPolicy};
pub use model::{
    Annotation, AnnotationStore, DistanceScope, DistanceSet, LandmarkKey, Point3, PredictionStore,
    Violation,
};
pub use radii::{Aggregation, HitRateCurve, RadiusSchedule, RobustStats};
