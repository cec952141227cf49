use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("domain is not convex")]
    NotConvex,

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("threshold formula nonpositive for epsilon = {0}")]
    ThresholdNonpositive(f64),

    #[error("{name} undefined at {value}: {reason}")]
    KernelDomain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("geometry: {0}")]
    Geometry(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("retraction failed: |m| = {norm} at cell {cell} (step too large)")]
    Retraction { cell: usize, norm: f64 },

    #[error("grid too large for the direct oracle: {cells} cells (limit {limit})")]
    GridTooLarge { cells: usize, limit: usize },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
