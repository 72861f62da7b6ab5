use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {reason}")]
    MalformedRow { row: u64, reason: String },

    #[error("row {row}: duplicate paper_id `{paper_id}`")]
    DuplicatePaperId { row: u64, paper_id: String },

    #[error("row {row}: duplicate unit_id `{unit_id}`")]
    DuplicateUnitId { row: u64, unit_id: String },

    #[error("input contains no records")]
    EmptySource,

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("citation population is empty")]
    EmptyPopulation,

    #[error("invalid boundary set: {0}")]
    InvalidBoundaries(String),

    #[error("invalid weighting scheme: {0}")]
    InvalidScheme(String),

    #[error("inconsistent threshold context: {0}")]
    InconsistentContext(String),

    #[error(
        "negative distinct count {value} for class {class} (cumulative counts must not decrease)"
    )]
    NegativeDistinct { class: usize, value: f64 },

    #[error("class boundaries {counts:?} do not cover scheme boundaries {scheme:?}")]
    BoundaryMismatch { counts: Vec<f64>, scheme: Vec<f64> },

    #[error("unit `{0}` has no papers")]
    ZeroPaperUnit(String),

    #[error("record `{0}` has no categories")]
    NoCategories(String),

    #[error("invalid statistical input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
