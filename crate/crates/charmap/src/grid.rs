//! Uniform tensor grids on the unit box / torus in 1 to 3 dimensions.
//!
//! Nodes on a periodic axis sit at `i/N` for `i = 0..N` (the node at `x = 1`
//! is identified with `x = 0` and not stored). Nodes on a Neumann axis sit at
//! `i/(N-1)` for `i = 0..N`, including both walls. The dual grid of a grid
//! places one node at the center of every cell; densities live there.

use crate::error::{CmError, Result};

/// Maximum supported dimension.
pub const MAX_DIM: usize = 3;

/// A point in the domain. Components beyond the grid dimension are ignored
/// and kept at zero.
pub type Point = [f64; MAX_DIM];

/// Per-axis boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Neumann,
}

/// One axis of a tensor grid: node count, cell width and node origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub h: f64,
    pub origin: f64,
    pub bc: Boundary,
}

impl Axis {
    /// Number of cells along this axis.
    pub fn cells(&self) -> usize {
        match self.bc {
            Boundary::Periodic => self.n,
            Boundary::Neumann => self.n - 1,
        }
    }

    /// Physical coordinate of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        self.origin + self.h * i as f64
    }
}

/// Uniform tensor grid descriptor for the unit box `[0,1]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    /// Primal grid with the given node counts and boundary conditions.
    ///
    /// Cell width is `1/N` on periodic axes and `1/(N-1)` on Neumann axes so
    /// that the nodes tile the unit interval.
    pub fn new(sizes: &[usize], bcs: &[Boundary]) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_DIM || sizes.len() != bcs.len() {
            return Err(CmError::BadDimension(sizes.len()));
        }
        let mut axes = Vec::with_capacity(sizes.len());
        for (axis, (&n, &bc)) in sizes.iter().zip(bcs).enumerate() {
            if n < 4 {
                return Err(CmError::GridTooSmall { axis, n });
            }
            let h = match bc {
                Boundary::Periodic => 1.0 / n as f64,
                Boundary::Neumann => 1.0 / (n - 1) as f64,
            };
            axes.push(Axis { n, h, origin: 0.0, bc });
        }
        Ok(Self { axes })
    }

    /// Fully periodic grid with `n` nodes per axis.
    pub fn periodic(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![Boundary::Periodic; dim])
    }

    /// Fully Neumann grid with `n` nodes per axis.
    pub fn neumann(dim: usize, n: usize) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![Boundary::Neumann; dim])
    }

    pub(crate) fn from_axes(axes: Vec<Axis>) -> Result<Self> {
        for (i, a) in axes.iter().enumerate() {
            if a.n < 4 {
                return Err(CmError::GridTooSmall { axis: i, n: a.n });
            }
        }
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(CmError::BadDimension(axes.len()));
        }
        Ok(Self { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    /// Total number of stored nodes.
    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Smallest cell width over the axes.
    pub fn h_min(&self) -> f64 {
        self.axes.iter().map(|a| a.h).fold(f64::INFINITY, f64::min)
    }

    /// Volume of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.h).product()
    }

    /// True if both grids have the same dimension and per-axis boundary tags.
    pub fn same_domain(&self, other: &GridSpec) -> bool {
        self.dim() == other.dim()
            && self
                .axes
                .iter()
                .zip(other.axes.iter())
                .all(|(a, b)| a.bc == b.bc)
    }

    /// Row-major linear index of a multi-index (last axis fastest).
    pub fn index(&self, idx: &[usize; MAX_DIM]) -> usize {
        let mut lin = 0;
        for (d, a) in self.axes.iter().enumerate() {
            lin = lin * a.n + idx[d];
        }
        lin
    }

    /// Multi-index of a row-major linear index.
    pub fn unindex(&self, mut lin: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for d in (0..self.dim()).rev() {
            let n = self.axes[d].n;
            idx[d] = lin % n;
            lin /= n;
        }
        idx
    }

    /// Physical position of a node by multi-index.
    pub fn node_pos(&self, idx: &[usize; MAX_DIM]) -> Point {
        let mut p = [0.0; MAX_DIM];
        for (d, a) in self.axes.iter().enumerate() {
            p[d] = a.node(idx[d]);
        }
        p
    }

    /// Physical position of a node by linear index.
    pub fn node_pos_lin(&self, lin: usize) -> Point {
        self.node_pos(&self.unindex(lin))
    }

    /// Dual grid: one node per cell, placed at the cell center.
    ///
    /// Periodic axes keep `N` cells, Neumann axes have `N-1`.
    pub fn dual(&self) -> Result<DualGrid> {
        let axes = self
            .axes
            .iter()
            .map(|a| Axis {
                n: a.cells(),
                h: a.h,
                origin: a.origin + 0.5 * a.h,
                bc: a.bc,
            })
            .collect();
        Ok(DualGrid { grid: GridSpec::from_axes(axes)? })
    }
}

/// Cell-centered companion of a primal grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGrid {
    grid: GridSpec,
}

impl DualGrid {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume()
    }
}

/// Wrap a coordinate into `[0,1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 { 0.0 } else { f }
}

/// Wrap-aware distance of two coordinates on one axis.
pub fn axis_distance(a: f64, b: f64, bc: Boundary) -> f64 {
    let d = (a - b).abs();
    match bc {
        Boundary::Periodic => {
            let d = d - d.floor();
            d.min(1.0 - d)
        }
        Boundary::Neumann => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_dual_nodes_are_midpoints() {
        let g = GridSpec::periodic(1, 4).unwrap();
        let d = g.dual().unwrap();
        let xs: Vec<f64> = (0..4).map(|i| d.grid().axis(0).node(i)).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn neumann_dual_nodes_are_midpoints() {
        let g = GridSpec::neumann(1, 5).unwrap();
        let d = g.dual().unwrap();
        assert_eq!(d.node_count(), 4);
        let xs: Vec<f64> = (0..4).map(|i| d.grid().axis(0).node(i)).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn dual_of_2d_periodic_has_one_node_per_cell() {
        let g = GridSpec::periodic(2, 4).unwrap();
        let d = g.dual().unwrap();
        assert_eq!(d.node_count(), 16);
        let p = d.grid().node_pos(&[0, 0, 0]);
        assert_eq!(&p[..2], &[0.125, 0.125]);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(
            GridSpec::periodic(1, 3),
            Err(CmError::GridTooSmall { .. })
        ));
    }

    #[test]
    fn index_roundtrip() {
        let g = GridSpec::new(&[5, 6, 7], &[Boundary::Neumann; 3]).unwrap();
        for lin in [0usize, 1, 41, 5 * 6 * 7 - 1] {
            assert_eq!(g.index(&g.unindex(lin)), lin);
        }
    }

    #[test]
    fn wrap_and_distance() {
        assert_eq!(wrap_unit(1.0), 0.0);
        assert!((wrap_unit(-0.1) - 0.9).abs() < 1e-15);
        assert!((axis_distance(0.05, 0.95, Boundary::Periodic) - 0.1).abs() < 1e-15);
        assert!((axis_distance(0.05, 0.95, Boundary::Neumann) - 0.9).abs() < 1e-15);
    }
}
