use std::path::PathBuf;

use crate::model::LandmarkKey;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no annotations")]
    NoAnnotations,

    #[error("annotator `{0}` has no reliability weight")]
    MissingWeight(String),

    #[error("annotator `{annotator}` has negative weight {weight}")]
    NegativeWeight { annotator: String, weight: f64 },

    #[error("weights sum to {sum}, expected 1 within 1e-6")]
    WeightSum { sum: f64 },

    #[error("landmark {key}: {source}")]
    AtLandmark {
        key: LandmarkKey,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown landmark {0}")]
    UnknownLandmark(LandmarkKey),

    #[error("unknown image `{0}`")]
    UnknownImage(String),

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error("unknown annotator `{0}`")]
    UnknownAnnotator(String),

    #[error("annotator `{annotator}` has no annotations on landmarks predicted by `{algorithm}`")]
    AnnotatorWithoutCoverage {
        annotator: String,
        algorithm: String,
    },

    #[error("duplicate annotation by `{annotator}` for landmark {key}")]
    DuplicateAnnotation { key: LandmarkKey, annotator: String },

    #[error("duplicate prediction by `{algorithm}` for landmark {key}")]
    DuplicatePrediction { key: LandmarkKey, algorithm: String },

    #[error("no landmarks in image `{0}`")]
    EmptyImage(String),

    #[error("missing prediction by `{algorithm}` for landmark {key}")]
    MissingPrediction { algorithm: String, key: LandmarkKey },

    #[error("no radius given for landmark {0}")]
    MissingRadius(LandmarkKey),

    #[error("invalid radius {0}: must be finite and non-negative")]
    InvalidRadius(f64),

    #[error("invalid distance {0}: must be finite and non-negative")]
    InvalidDistance(f64),

    #[error("cannot extrapolate from empty distance set")]
    EmptyDistanceSet,

    #[error("invalid mu grid: {0}")]
    InvalidGrid(String),

    #[error("empty radius schedule")]
    EmptySchedule,

    #[error("hit-rate curve `{0}` has no samples")]
    EmptyCurve(String),

    #[error("curves `{a}` and `{b}` cover disjoint radius ranges")]
    DisjointCurves { a: String, b: String },

    #[error("no curves to rank")]
    NoCurves,

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("no (algorithm, annotator) pair has coverage")]
    EmptyMatrix,

    #[error("nothing to summarize for algorithm `{0}`")]
    EmptyPool(String),

    #[error("annotator count must be at least 1")]
    NoAnnotators,

    #[error("invalid store: {0}")]
    InvalidStore(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(key: &LandmarkKey, source: Error) -> Self {
        Error::AtLandmark {
            key: key.clone(),
            source: Box::new(source),
        }
    }
}
