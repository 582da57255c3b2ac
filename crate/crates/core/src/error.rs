use thiserror::Error;

use crate::spectral::Wavevector;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("reality violated at {0}: conjugate mode missing or not conjugate")]
    Reality(Wavevector),
    #[error("field is not divergence-free (residual {0:e})")]
    NotDivergenceFree(f64),
    #[error("resolution {n} too small, need at least {required}")]
    ResolutionTooSmall { n: usize, required: usize },
    #[error("resolution {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid exponent {0}: must be >= 1")]
    InvalidExponent(f64),
    #[error("negative radius {0}")]
    NegativeRadius(f64),
    #[error("shell index {0} below -1")]
    InvalidShell(i32),
    #[error("infeasible shell {q}: {points} grid points exceed budget {budget}")]
    InfeasibleShell { q: i32, points: u128, budget: u128 },
    #[error("infeasible block {name}: {points} lattice points exceed budget {budget}")]
    InfeasibleBlock { name: String, points: u128, budget: u128 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("empty lattice block {0}")]
    EmptyBlock(String),
    #[error("blocks overlap: {0}")]
    BlockOverlap(String),
    #[error("{0} out of validated range")]
    OutOfRange(String),
    #[error("initial datum exceeds dealias band; offending modes: {0:?}")]
    DealiasBand(Vec<Wavevector>),
    #[error("numerical failure at step {step} (t = {time}): {what}")]
    Numerical { step: usize, time: f64, what: String },
    #[error("probe not recorded: {0}")]
    ProbeNotRecorded(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
