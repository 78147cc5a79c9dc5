use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, MiocpError>;

#[derive(Debug, Error)]
pub enum MiocpError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("{what} not PD{}", at_step(*.k))]
    NotPositiveDefinite { what: String, k: Option<usize> },

    #[error("matrix is not PSD (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("{what} not invertible{}", at_step(*.k))]
    NotInvertible { what: String, k: Option<usize> },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("shape mismatch in field `{field}`: {detail}")]
    Shape { field: String, detail: String },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("config parse error in {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("regression failed: {0}")]
    Regression(String),

    #[error("solver failed at iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<MiocpError>,
    },

    #[error("grid search: {0}")]
    Grid(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn at_step(k: Option<usize>) -> String {
    match k {
        Some(k) => format!(" at k={k}"),
        None => String::new(),
    }
}

impl MiocpError {
    pub(crate) fn dims(context: &str, expected: impl ToString, found: impl ToString) -> Self {
        MiocpError::DimensionMismatch {
            context: context.to_string(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        MiocpError::Io {
            path: path.into(),
            source,
        }
    }
}
