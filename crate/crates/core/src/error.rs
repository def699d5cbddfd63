use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge (last estimates {last} and {previous})")]
    NonConvergence { last: Complex64, previous: Complex64 },

    #[error("contours intersect: {0}")]
    ContourIntersection(String),

    #[error("invalid levels: {0}")]
    InvalidLevels(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("degenerate configuration: entries {0} and {1} coincide")]
    DegenerateConfiguration(f64, f64),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("energy {0} is not inside the bulk (-2, 2)")]
    EdgeEnergy(f64),

    #[error("invalid entry distribution: {0}")]
    InvalidDistribution(String),

    #[error("no points fall inside the requested window")]
    EmptyWindow,

    #[error("determinant has non-negligible imaginary part {0:e}")]
    NonNegligibleImaginaryPart(f64),

    #[error("point {0} is not in the upper half-plane")]
    LowerHalfPlane(Complex64),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iteration escaped the upper half-plane; trajectory {trajectory:?}")]
    LeftHalfPlaneEscape { trajectory: Vec<Complex64> },

    #[error("interior slots collide: {0}")]
    SlotCollision(String),

    #[error("query out of range: {0}")]
    RangeError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
