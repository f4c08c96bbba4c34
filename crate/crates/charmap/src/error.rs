//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, interpolation, map evolution and I/O.
#[derive(Debug, Error)]
pub enum CmError {
    #[error("grid too small: axis {axis} has {n} nodes, need at least 4")]
    GridTooSmall { axis: usize, n: usize },

    #[error("unsupported dimension {0}, must be 1, 2 or 3")]
    BadDimension(usize),

    #[error("non-finite sample value {value} at node {node}")]
    NonFiniteSample { node: usize, value: f64 },

    #[error("point component {value} outside [0,1] on clamped axis {axis}")]
    OutOfDomain { axis: usize, value: f64 },

    #[error("derivative order {order} on axis {axis} exceeds maximum {max}")]
    DerivativeOrder { axis: usize, order: usize, max: usize },

    #[error("domain mismatch: boundary signatures or dimensions differ")]
    DomainMismatch,

    #[error("CFL violation: foot point {value} left the domain on axis {axis} by more than one cell")]
    CflViolation { axis: usize, value: f64 },

    #[error("map is singular: Jacobian determinant {det} at a sample point")]
    SingularMap { det: f64 },

    #[error("density positivity lost: minimum value {min}")]
    PositivityLost { min: f64 },

    #[error("nonpositive density sample {value}")]
    NonPositiveDensity { value: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("empty chain has no grid")]
    EmptyChain,

    #[error("degenerate surface element: Gram determinant {det}")]
    DegenerateSurface { det: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CmError>;
