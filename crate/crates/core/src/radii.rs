//! Radius extrapolation from inter-rater distances and hit-rate curves.
//!
//! A radius schedule samples `r = max(0, median(D) + mu * MAD(D))` over a grid
//! of `mu` values. Evaluating an algorithm's hit rate at every scheduled radius
//! gives its hit-rate curve; curves are linearly interpolated between samples
//! and clamped outside them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::pool_distances;
use crate::metrics::{hit_rate, ConsensusStore, MissingPolicy, PoolScope, RadiusSpec};
use crate::model::{AnnotationStore, DistanceScope, DistanceSet, LandmarkKey, PredictionStore};

pub const DEFAULT_MU_MIN: f64 = -2.0;
pub const DEFAULT_MU_MAX: f64 = 30.0;
pub const DEFAULT_MU_STEPS: usize = 32;

/// Median and raw (unscaled) median absolute deviation of a distance set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustStats {
    pub median: f64,
    pub mad: f64,
}

impl RobustStats {
    /// `max(0, median + mu * mad)`.
    pub fn radius(&self, mu: f64) -> f64 {
        let r = self.median + mu * self.mad;
        if r > 0.0 {
            r
        } else {
            0.0
        }
    }
}

/// Median of `values`, reordering them. Even lengths average the central pair.
fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (left, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + upper) / 2.0
    }
}

pub fn robust_stats(d: &DistanceSet) -> Result<RobustStats> {
    if d.is_empty() {
        return Err(Error::EmptyDistanceSet);
    }
    let mut work = d.values().to_vec();
    let median = median_in_place(&mut work);
    for v in &mut work {
        *v = (*v - median).abs();
    }
    let mad = median_in_place(&mut work);
    Ok(RobustStats { median, mad })
}

pub fn radius_from_mu(d: &DistanceSet, mu: f64) -> Result<f64> {
    robust_stats(d).map(|s| s.radius(mu))
}

/// Same as [`radius_from_mu`] on the distances pooled over one image only.
pub fn radius_from_mu_per_image(
    store: &AnnotationStore,
    consensus: &ConsensusStore,
    image_id: &str,
    mu: f64,
) -> Result<f64> {
    let d = pool_distances(store, consensus, &PoolScope::Image(image_id.to_owned()))?;
    radius_from_mu(&d, mu)
}

/// `steps + 1` evenly spaced values from `mu_min` to `mu_max` inclusive, or
/// the single value when both ends coincide.
pub fn mu_grid(mu_min: f64, mu_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(mu_min.is_finite() && mu_max.is_finite()) {
        return Err(Error::InvalidGrid("bounds must be finite".into()));
    }
    if mu_min > mu_max {
        return Err(Error::InvalidGrid(format!(
            "mu_min {mu_min} > mu_max {mu_max}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidGrid("steps must be at least 1".into()));
    }
    if mu_min == mu_max {
        return Ok(vec![mu_min]);
    }
    let span = mu_max - mu_min;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| mu_min + span * i as f64 / steps as f64)
        .collect();
    grid[steps] = mu_max;
    Ok(grid)
}

/// Parameters of a `mu` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuGrid {
    pub mu_min: f64,
    pub mu_max: f64,
    pub steps: usize,
}

impl Default for MuGrid {
    fn default() -> Self {
        Self {
            mu_min: DEFAULT_MU_MIN,
            mu_max: DEFAULT_MU_MAX,
            steps: DEFAULT_MU_STEPS,
        }
    }
}

impl MuGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        mu_grid(self.mu_min, self.mu_max, self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub mu: f64,
    #[serde(rename = "radius_mm")]
    pub radius: f64,
}

/// Radii sampled from one distance population.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    pub scope: DistanceScope,
    pub points: Vec<SchedulePoint>,
    pub stats: RobustStats,
}

impl RadiusSchedule {
    /// `mus` must be strictly increasing.
    pub fn from_distances(d: &DistanceSet, mus: &[f64]) -> Result<Self> {
        if mus.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if mus
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
        {
            return Err(Error::InvalidGrid(
                "mu values must be strictly increasing".into(),
            ));
        }
        let stats = robust_stats(d)?;
        let points = mus
            .iter()
            .map(|&mu| SchedulePoint {
                mu,
                radius: stats.radius(mu),
            })
            .collect();
        Ok(Self {
            scope: d.scope().clone(),
            points,
            stats,
        })
    }
}

/// How radii are assigned to images when building a curve.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSchedule {
    /// One radius per `mu` for every landmark of every image.
    Global(RadiusSchedule),
    /// A radius per `mu` and image, from that image's own distances.
    PerImage(BTreeMap<String, RadiusSchedule>),
}

impl CurveSchedule {
    pub fn global(
        store: &AnnotationStore,
        consensus: &ConsensusStore,
        mus: &[f64],
    ) -> Result<Self> {
        let d = pool_distances(store, consensus, &PoolScope::Global)?;
        RadiusSchedule::from_distances(&d, mus).map(CurveSchedule::Global)
    }

    pub fn per_image(
        store: &AnnotationStore,
        consensus: &ConsensusStore,
        mus: &[f64],
    ) -> Result<Self> {
        store
            .image_ids()
            .into_iter()
            .map(|image| {
                let d = pool_distances(store, consensus, &PoolScope::Image(image.to_owned()))?;
                Ok((image.to_owned(), RadiusSchedule::from_distances(&d, mus)?))
            })
            .collect::<Result<_>>()
            .map(CurveSchedule::PerImage)
    }

    fn len(&self) -> usize {
        match self {
            CurveSchedule::Global(s) => s.points.len(),
            CurveSchedule::PerImage(m) => m.values().next().map_or(0, |s| s.points.len()),
        }
    }
}

/// Whether radii come from the distances of the whole dataset or of each image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusScope {
    #[default]
    Global,
    Image,
}

/// How per-image hit rates are combined into one curve value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Mean of the per-image hit rates; every image weighs the same.
    #[default]
    ImageMean,
    /// Hits over all landmarks of all images.
    LandmarkPooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    /// The `mu` the radius came from, when known.
    pub mu: Option<f64>,
    #[serde(rename = "radius_mm")]
    pub radius: f64,
    pub hit_rate: f64,
}

/// Hit rate of one algorithm as a function of radius, linear between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRateCurve {
    pub algorithm_id: String,
    samples: Vec<CurveSample>,
}

impl HitRateCurve {
    /// Builds a curve from `(radius, hit_rate)` pairs with strictly increasing radii.
    pub fn new(algorithm_id: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        let samples = points
            .iter()
            .map(|&(radius, hit_rate)| CurveSample {
                mu: None,
                radius,
                hit_rate,
            })
            .collect();
        Self::from_samples(algorithm_id, samples)
    }

    pub fn from_samples(
        algorithm_id: impl Into<String>,
        samples: Vec<CurveSample>,
    ) -> Result<Self> {
        let algorithm_id = algorithm_id.into();
        for s in &samples {
            if !(s.radius >= 0.0 && s.radius.is_finite()) {
                return Err(Error::InvalidRadius(s.radius));
            }
            if !(0.0..=1.0).contains(&s.hit_rate) {
                return Err(Error::InvalidStore(format!(
                    "curve `{algorithm_id}` has hit rate {} outside [0, 1]",
                    s.hit_rate
                )));
            }
        }
        if samples
            .windows(2)
            .any(|w| w[0].radius.partial_cmp(&w[1].radius) != Some(Ordering::Less))
        {
            return Err(Error::InvalidStore(format!(
                "curve `{algorithm_id}` radii are not strictly increasing"
            )));
        }
        Ok(Self {
            algorithm_id,
            samples,
        })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `(first, last)` sampled radius.
    pub fn range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.radius, self.samples.last()?.radius))
    }
}

/// A curve together with the landmarks that had no prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveBuild {
    pub curve: HitRateCurve,
    pub missing: Vec<LandmarkKey>,
}

/// Evaluates `algorithm_id` at every scheduled radius.
///
/// Under [`CurveSchedule::PerImage`] the sample radius is the mean of the
/// per-image radii used for that `mu`. Consecutive samples with equal radius
/// (clamped at zero, or zero MAD) are merged, keeping the smallest `mu`.
pub fn build_curve(
    consensus: &ConsensusStore,
    predictions: &PredictionStore,
    algorithm_id: &str,
    schedule: &CurveSchedule,
    missing_policy: MissingPolicy,
    aggregation: Aggregation,
) -> Result<CurveBuild> {
    let n = schedule.len();
    if n == 0 {
        return Err(Error::EmptySchedule);
    }
    let images = consensus.image_ids();
    let mut samples: Vec<CurveSample> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for i in 0..n {
        let mut hits = 0usize;
        let mut landmarks = 0usize;
        let mut rate_sum = 0.0;
        let mut radius_sum = 0.0;
        let mut mu = 0.0;
        for image in &images {
            let point = match schedule {
                CurveSchedule::Global(s) => s.points[i],
                CurveSchedule::PerImage(m) => {
                    m.get(*image)
                        .ok_or_else(|| Error::UnknownImage((*image).to_owned()))?
                        .points[i]
                }
            };
            mu = point.mu;
            radius_sum += point.radius;
            let r = hit_rate(
                consensus,
                predictions,
                algorithm_id,
                image,
                RadiusSpec::Uniform(point.radius),
                missing_policy,
            )?;
            hits += r.hits;
            landmarks += r.landmarks;
            rate_sum += r.rate();
            if i == 0 {
                missing.extend(r.missing);
            }
        }
        let hit_rate = match aggregation {
            Aggregation::ImageMean => rate_sum / images.len() as f64,
            Aggregation::LandmarkPooled => hits as f64 / landmarks as f64,
        };
        let radius = match schedule {
            CurveSchedule::Global(s) => s.points[i].radius,
            CurveSchedule::PerImage(_) => radius_sum / images.len() as f64,
        };
        if samples.last().is_some_and(|last| last.radius == radius) {
            continue;
        }
        samples.push(CurveSample {
            mu: Some(mu),
            radius,
            hit_rate,
        });
    }
    Ok(CurveBuild {
        curve: HitRateCurve::from_samples(algorithm_id, samples)?,
        missing,
    })
}

/// Linear interpolation of the curve at `r`, clamped to the end samples.
pub fn interpolate(curve: &HitRateCurve, r: f64) -> Result<f64> {
    let s = curve.samples();
    let (first, last) = match (s.first(), s.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::EmptyCurve(curve.algorithm_id.clone())),
    };
    if r.is_nan() {
        return Err(Error::InvalidRadius(r));
    }
    if r <= first.radius {
        return Ok(first.hit_rate);
    }
    if r >= last.radius {
        return Ok(last.hit_rate);
    }
    // first index with radius > r; 1 <= upper < len
    let upper = s.partition_point(|p| p.radius <= r);
    let (a, b) = (&s[upper - 1], &s[upper]);
    if a.radius == r {
        return Ok(a.hit_rate);
    }
    let t = (r - a.radius) / (b.radius - a.radius);
    Ok(a.hit_rate + t * (b.hit_rate - a.hit_rate))
}

/// Which curve leads after a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingDirection {
    /// `a - b` goes from positive to negative.
    AFallsBelow,
    /// `a - b` goes from negative to positive.
    ARisesAbove,
}

/// The difference of two curves changes sign somewhere in `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub lower: f64,
    pub upper: f64,
    pub direction: CrossingDirection,
}

/// Finds every sign change of `a - b` over the overlap of the two radius ranges.
///
/// The difference is piecewise linear on the union of both curves' knots, so
/// sign changes can only happen between consecutive knots. Knots where the
/// difference is exactly zero are skipped; a crossing interval runs from the
/// last knot with a nonzero difference to the first knot with the opposite sign.
pub fn find_crossings(a: &HitRateCurve, b: &HitRateCurve) -> Result<Vec<Crossing>> {
    let (a_lo, a_hi) = a
        .range()
        .ok_or_else(|| Error::EmptyCurve(a.algorithm_id.clone()))?;
    let (b_lo, b_hi) = b
        .range()
        .ok_or_else(|| Error::EmptyCurve(b.algorithm_id.clone()))?;
    let lo = a_lo.max(b_lo);
    let hi = a_hi.min(b_hi);
    if lo > hi {
        return Err(Error::DisjointCurves {
            a: a.algorithm_id.clone(),
            b: b.algorithm_id.clone(),
        });
    }
    let mut knots: Vec<f64> = a
        .samples()
        .iter()
        .chain(b.samples())
        .map(|s| s.radius)
        .filter(|r| (lo..=hi).contains(r))
        .chain([lo, hi])
        .collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let mut crossings = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for r in knots {
        let diff = interpolate(a, r)? - interpolate(b, r)?;
        if diff == 0.0 {
            continue;
        }
        if let Some((prev_r, prev_diff)) = last {
            if prev_diff.signum() != diff.signum() {
                crossings.push(Crossing {
                    lower: prev_r,
                    upper: r,
                    direction: if diff < 0.0 {
                        CrossingDirection::AFallsBelow
                    } else {
                        CrossingDirection::ARisesAbove
                    },
                });
            }
        }
        last = Some((r, diff));
    }
    Ok(crossings)
}
