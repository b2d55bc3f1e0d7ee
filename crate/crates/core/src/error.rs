use thiserror::Error;

/// Errors raised by the solvers and their building blocks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("CFL violation: dt = {dt:.3e} exceeds limit {limit:.3e} (max |u| = {max_speed:.3e})")]
    Cfl {
        dt: f64,
        limit: f64,
        max_speed: f64,
    },

    #[error("vacuum: density dropped to {min_density:.3e} at t = {time:.4}")]
    Vacuum { min_density: f64, time: f64 },

    #[error("state became non-finite at t = {time:.4}")]
    Blowup { time: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
