use thiserror::Error;

use crate::master::Trajectory;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {re} {im:+}i)")]
    InvalidTrace { re: f64, im: f64 },

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "forward map at t = {time} is numerically singular (smallest singular value {smallest_singular_value:e}, inverse residual {residual:e})"
    )]
    SingularTime {
        time: f64,
        smallest_singular_value: f64,
        residual: f64,
    },

    #[error("canonical maps do not chain: first ends at {first_end}, second starts at {second_start}")]
    TimeChainMismatch { first_end: f64, second_start: f64 },

    #[error("canonical maps were built from different total dynamics")]
    SourceMismatch,

    #[error("map is too far from the identity for Lindblad extraction (dominant eigenvalue {0})")]
    FarFromIdentity(f64),

    #[error("map is not completely positive (eigenvalue {0:e})")]
    NotCompletelyPositive(f64),

    #[error("integration aborted at t = {time}: {cause}")]
    IntegrationAborted {
        time: f64,
        cause: Box<Error>,
        partial: Box<Trajectory>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
