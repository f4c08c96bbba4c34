//! Characteristic-map density transport and equiareal reparametrization of
//! curves and surfaces advected by 3-D flows.
//!
//! The library evolves backward characteristic maps of the diffusion
//! velocity `u = -∇ log ρ` to build transport maps that push the uniform
//! density onto a target density, and applies them in parameter space to
//! keep advected curve and surface parametrizations equiareal. Maps are
//! piecewise Hermite interpolants (linear or cubic) on uniform grids,
//! factored into submap chains at remap events.

pub mod ambient;
pub mod density;
pub mod error;
pub mod export;
pub mod field;
pub mod grid;
pub mod halton;
pub mod heatflow;
pub mod io;
pub mod jet;
pub mod map;
pub mod problems;
pub mod spectral;
pub mod surface;

pub use error::{CmError, Result};
pub use field::{HermiteField, Order};
pub use grid::{Boundary, DualGrid, GridSpec, Point};
pub use map::{Direction, MapField, SubmapChain};
