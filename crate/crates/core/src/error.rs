use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("transfer probability out of range at x={x}: p_up={p_up}")]
    CouplingOutOfRange { x: i64, p_up: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate distribution: variance is zero")]
    DegeneratePdf,

    #[error("generating function is singular at q={0}")]
    SingularEvaluationPoint(String),

    #[error("need at least 3 distinct step counts spanning a decade, got {0:?}")]
    InsufficientScales(Vec<usize>),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}:{line}: price must be positive, got {price}")]
    NonPositivePrice {
        path: PathBuf,
        line: u64,
        price: f64,
    },

    #[error("{path}:{line}: duplicate date {date}")]
    DuplicateDate {
        path: PathBuf,
        line: u64,
        date: String,
    },

    #[error("{0}: no data rows")]
    EmptyFile(PathBuf),

    #[error(
        "scale normalisation did not converge after {iterations} iterations (last sigma {sigma})"
    )]
    NonConvergentNormalization { iterations: usize, sigma: f64 },

    #[error("need at least 3 non-empty bins in fit range, found {found}")]
    InsufficientBins { found: usize },

    #[error("no simplex converged within {max_iter} iterations")]
    OptimizerStalled { max_iter: usize },

    #[error("quadrature did not reach tolerance (estimated error {error:e})")]
    QuadratureFailure { error: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
