//! Error type shared by every stage of the pipeline.

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("duplicate date {date} at row {row}")]
    DuplicateDate { row: usize, date: NaiveDate },

    #[error("alignment error for `{series}`: {message}")]
    Alignment { series: String, message: String },

    #[error("domain error in `{series}` at {date}: value {value} is not strictly positive")]
    Domain {
        series: String,
        date: NaiveDate,
        value: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series too short: need at least {required} observations, have {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("sample variance is zero")]
    ZeroVariance,

    #[error("rank deficient design: column `{column}` is linearly dependent on earlier columns")]
    RankDeficient { column: String },

    #[error(
        "insufficient degrees of freedom: {regressors} regressors need more than {required} observations, have {available}"
    )]
    DegreesOfFreedom {
        regressors: usize,
        required: usize,
        available: usize,
    },

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("parameter constraint violated: {0}")]
    Constraint(String),

    #[error("no lag order in {p_min}..={p_max} yields white residuals at alpha = {alpha}")]
    NoWhiteLag {
        p_min: usize,
        p_max: usize,
        alpha: f64,
        /// (p, per-equation Ljung-Box p-values) for every order tried.
        table: Vec<(usize, Vec<f64>)>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
