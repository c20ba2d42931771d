//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by construction, dynamics, and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimensions do not match: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("support site {site} out of range for chain of {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("chain of {requested} sites exceeds the dense-matrix limit of {max} sites")]
    DimensionOverflow { requested: usize, max: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not unitary on its support (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("invalid time series: {0}")]
    InvalidTimeSeries(String),

    #[error("time {0} outside the sampled grid [{1}, {2}]")]
    TimeOutsideGrid(f64, f64, f64),

    #[error("fidelity exceeded 1 by {0:.3e}; finite-difference QFI breaks down")]
    FidelityOverflow(f64),

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),

    #[error("eigensolver failed with LAPACK info code {0}")]
    Eigensolver(i32),

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
