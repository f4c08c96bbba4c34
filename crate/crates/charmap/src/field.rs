//! Piecewise tensor-product Hermite interpolation on uniform grids.
//!
//! Two orders are supported: `Linear` (degree 1 per axis, node values only)
//! and `Cubic` (degree 3 per axis, node packets holding all mixed first
//! derivatives `∂^α f` with `α ∈ {0,1}^dim`). Packets are stored in units of
//! the reference cell, i.e. the slot for `α` holds `∂^α f · Π h_d^{α_d}`, so
//! per-cell evaluation is a pure tensor contraction; the public evaluators
//! convert back to physical units.
//!
//! Storage is row-major over nodes (last axis fastest) with the packet
//! contiguous per node, value slot first, remaining slots in lexicographic
//! order of `α`.

use crate::error::{CmError, Result};
use crate::grid::{wrap_unit, Boundary, GridSpec, Point, MAX_DIM};
use rayon::prelude::*;

/// Interpolation order: `Linear` is Hermite order m=0, `Cubic` is m=1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Linear,
    Cubic,
}

impl Order {
    /// The Hermite order m.
    pub fn m(self) -> usize {
        match self {
            Order::Linear => 0,
            Order::Cubic => 1,
        }
    }

    /// Highest per-axis derivative the interpolant supports (`m + 1`).
    pub fn max_deriv(self) -> usize {
        self.m() + 1
    }

    /// Packet length per node: `2^dim` slots for cubic, one for linear.
    pub fn packet_len(self, dim: usize) -> usize {
        match self {
            Order::Linear => 1,
            Order::Cubic => 1 << dim,
        }
    }

    /// Number of per-axis basis functions (per cell).
    fn basis_count(self) -> usize {
        match self {
            Order::Linear => 2,
            Order::Cubic => 4,
        }
    }
}

/// Cubic Hermite basis on [0,1] in the order `[H00, H10, H01, H11]`
/// (corner 0 value, corner 0 slope, corner 1 value, corner 1 slope),
/// differentiated `a` times, `a ≤ 2`.
fn cubic_basis(t: f64, a: usize, out: &mut [f64; 4]) {
    match a {
        0 => {
            let t2 = t * t;
            let t3 = t2 * t;
            out[0] = 2.0 * t3 - 3.0 * t2 + 1.0;
            out[1] = t3 - 2.0 * t2 + t;
            out[2] = -2.0 * t3 + 3.0 * t2;
            out[3] = t3 - t2;
        }
        1 => {
            let t2 = t * t;
            out[0] = 6.0 * t2 - 6.0 * t;
            out[1] = 3.0 * t2 - 4.0 * t + 1.0;
            out[2] = -6.0 * t2 + 6.0 * t;
            out[3] = 3.0 * t2 - 2.0 * t;
        }
        _ => {
            out[0] = 12.0 * t - 6.0;
            out[1] = 6.0 * t - 4.0;
            out[2] = -12.0 * t + 6.0;
            out[3] = 6.0 * t - 2.0;
        }
    }
}

/// Linear basis `[1-t, t]` differentiated `a` times, `a ≤ 1`.
fn linear_basis(t: f64, a: usize, out: &mut [f64; 4]) {
    if a == 0 {
        out[0] = 1.0 - t;
        out[1] = t;
    } else {
        out[0] = -1.0;
        out[1] = 1.0;
    }
    out[2] = 0.0;
    out[3] = 0.0;
}

/// Snap local coordinates this close to a node onto it, so that node
/// evaluation reproduces packets exactly even when `h` is not a power of two.
const T_SNAP: f64 = 5e-13;

/// Per-axis cell location of an evaluation point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AxisLoc {
    pub cell: usize,
    pub t: f64,
}

/// Locate `x` along axis `d` of `grid`. On periodic axes the coordinate
/// wraps; on Neumann axes it must lie in `[0,1]` (cell-centered grids
/// extrapolate their edge cells by half a cell to reach the walls).
pub(crate) fn locate(grid: &GridSpec, d: usize, x: f64) -> Result<AxisLoc> {
    let ax = grid.axis(d);
    let cells = ax.cells() as isize;
    match ax.bc {
        Boundary::Periodic => {
            let u = (wrap_unit(x) - ax.origin) / ax.h;
            let c = u.floor();
            let mut t = u - c;
            let mut cell = (c as isize).rem_euclid(cells);
            if t < T_SNAP {
                t = 0.0;
            } else if t > 1.0 - T_SNAP {
                t = 0.0;
                cell = (cell + 1).rem_euclid(cells);
            }
            Ok(AxisLoc { cell: cell as usize, t })
        }
        Boundary::Neumann => {
            if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                return Err(CmError::OutOfDomain { axis: d, value: x });
            }
            let u = (x - ax.origin) / ax.h;
            let c = (u.floor() as isize).clamp(0, cells - 1);
            let mut t = u - c as f64;
            if t.abs() < T_SNAP {
                t = 0.0;
            } else if (t - 1.0).abs() < T_SNAP {
                t = 1.0;
            }
            Ok(AxisLoc { cell: c as usize, t })
        }
    }
}

/// Source of node data for projection: must provide `∂^α f` for every
/// `α ∈ {0,1}^dim` requested by the order (only `α = 0` for linear).
pub trait FieldSample: Sync {
    fn sample(&self, x: &Point, alpha: &[usize; MAX_DIM]) -> f64;
}

impl<F> FieldSample for F
where
    F: Fn(&Point, &[usize; MAX_DIM]) -> f64 + Sync,
{
    fn sample(&self, x: &Point, alpha: &[usize; MAX_DIM]) -> f64 {
        self(x, alpha)
    }
}

/// Scalar field as a piecewise tensor-product Hermite interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteField {
    grid: GridSpec,
    order: Order,
    data: Vec<f64>,
}

impl HermiteField {
    /// Project a function onto the interpolation space by matching `∂^α f`
    /// at every node (Hermite projection).
    pub fn project(grid: &GridSpec, order: Order, f: &impl FieldSample) -> Result<Self> {
        let dim = grid.dim();
        let plen = order.packet_len(dim);
        let nodes = grid.node_count();
        let mut data = vec![0.0; nodes * plen];
        let chunk = plen.max(1);
        data.par_chunks_mut(chunk).enumerate().for_each(|(lin, packet)| {
            let pos = grid.node_pos_lin(lin);
            for (s, slot) in packet.iter_mut().enumerate() {
                let mut alpha = [0usize; MAX_DIM];
                let mut scale = 1.0;
                for d in 0..dim {
                    let bit = (s >> (dim - 1 - d)) & 1;
                    alpha[d] = bit;
                    if bit == 1 {
                        scale *= grid.axis(d).h;
                    }
                }
                *slot = f.sample(&pos, &alpha) * scale;
            }
        });
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(CmError::NonFiniteSample { node: i / plen, value: *v });
            }
        }
        Ok(Self { grid: grid.clone(), order, data })
    }

    /// Field with all packets zero.
    pub fn zeros(grid: &GridSpec, order: Order) -> Self {
        let plen = order.packet_len(grid.dim());
        Self {
            grid: grid.clone(),
            order,
            data: vec![0.0; grid.node_count() * plen],
        }
    }

    /// Build from raw reference-unit packet data (row-major nodes, packet
    /// contiguous, value slot first).
    pub fn from_raw(grid: &GridSpec, order: Order, data: Vec<f64>) -> Result<Self> {
        let plen = order.packet_len(grid.dim());
        if data.len() != grid.node_count() * plen {
            return Err(CmError::Format(format!(
                "node data length {} does not match {} nodes x {} slots",
                data.len(),
                grid.node_count(),
                plen
            )));
        }
        Ok(Self { grid: grid.clone(), order, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// Raw reference-unit packet data.
    pub fn raw_data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn raw_data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn packet_len(&self) -> usize {
        self.order.packet_len(self.grid.dim())
    }

    /// Evaluate `∂^α` of the interpolant at `x` (physical units).
    ///
    /// Each entry of `alpha` may be at most `m + 1`; on Neumann axes `x`
    /// must lie inside `[0,1]`.
    pub fn eval(&self, x: &Point, alpha: &[usize; MAX_DIM]) -> Result<f64> {
        let dim = self.grid.dim();
        let maxd = self.order.max_deriv();
        for d in 0..dim {
            if alpha[d] > maxd {
                return Err(CmError::DerivativeOrder { axis: d, order: alpha[d], max: maxd });
            }
        }
        let mut locs = [AxisLoc { cell: 0, t: 0.0 }; MAX_DIM];
        for d in 0..dim {
            locs[d] = locate(&self.grid, d, x[d])?;
        }
        Ok(self.eval_located(&locs, alpha))
    }

    /// Convenience: value of the interpolant at `x`.
    pub fn value(&self, x: &Point) -> Result<f64> {
        self.eval(x, &[0; MAX_DIM])
    }

    fn node_of(&self, locs: &[AxisLoc; MAX_DIM], corner: &[usize; MAX_DIM]) -> usize {
        let mut idx = [0usize; MAX_DIM];
        for d in 0..self.grid.dim() {
            let ax = self.grid.axis(d);
            let i = locs[d].cell + corner[d];
            idx[d] = match ax.bc {
                Boundary::Periodic => i % ax.n,
                Boundary::Neumann => i,
            };
        }
        self.grid.index(&idx)
    }

    pub(crate) fn eval_located(&self, locs: &[AxisLoc; MAX_DIM], alpha: &[usize; MAX_DIM]) -> f64 {
        let dim = self.grid.dim();
        let nb = self.order.basis_count();
        let mut rows = [[0.0f64; 4]; MAX_DIM];
        for d in 0..dim {
            match self.order {
                Order::Cubic => cubic_basis(locs[d].t, alpha[d], &mut rows[d]),
                Order::Linear => linear_basis(locs[d].t, alpha[d], &mut rows[d]),
            }
            let hs = self.grid.axis(d).h.powi(alpha[d] as i32);
            for v in rows[d].iter_mut() {
                *v /= hs;
            }
        }
        let plen = self.packet_len();
        let mut acc = 0.0;
        // Corners and slots share the per-axis basis index p = 2*corner + slot
        // for cubic; for linear p = corner with the single value slot.
        let mut p = [0usize; MAX_DIM];
        loop {
            let mut corner = [0usize; MAX_DIM];
            let mut slot = 0usize;
            let mut w = 1.0;
            for d in 0..dim {
                let (o, s) = match self.order {
                    Order::Cubic => (p[d] >> 1, p[d] & 1),
                    Order::Linear => (p[d], 0),
                };
                corner[d] = o;
                slot = (slot << 1) | s;
                w *= rows[d][p[d]];
            }
            let slot = if plen == 1 { 0 } else { slot };
            let node = self.node_of(locs, &corner);
            acc += w * self.data[node * plen + slot];
            // advance multi-index p
            let mut d = dim;
            loop {
                if d == 0 {
                    return acc;
                }
                d -= 1;
                p[d] += 1;
                if p[d] < nb {
                    break;
                }
                p[d] = 0;
            }
        }
    }

    /// Evaluate all per-axis derivative combinations `D[a0][a1][a2]` with
    /// `a_d ≤ m+1` at once (physical units). Unused trailing axes hold the
    /// order-0 value. This is the kernel behind jet evaluation.
    pub(crate) fn eval_all_derivs(&self, locs: &[AxisLoc; MAX_DIM]) -> DerivTensor {
        let dim = self.grid.dim();
        let nb = self.order.basis_count();
        let no = self.order.max_deriv() + 1;
        let plen = self.packet_len();

        let mut rows = [[[0.0f64; 4]; 3]; MAX_DIM];
        for d in 0..dim {
            let h = self.grid.axis(d).h;
            let mut hs = 1.0;
            for a in 0..no {
                match self.order {
                    Order::Cubic => cubic_basis(locs[d].t, a, &mut rows[d][a]),
                    Order::Linear => linear_basis(locs[d].t, a, &mut rows[d][a]),
                }
                for v in rows[d][a].iter_mut() {
                    *v /= hs;
                }
                hs *= h;
            }
        }

        // Gather cell coefficients C[p0][p1][p2]; missing axes collapse to
        // a single basis entry.
        let n0 = if dim > 0 { nb } else { 1 };
        let n1 = if dim > 1 { nb } else { 1 };
        let n2 = if dim > 2 { nb } else { 1 };
        let mut coef = [0.0f64; 64];
        for p0 in 0..n0 {
            for p1 in 0..n1 {
                for p2 in 0..n2 {
                    let p = [p0, p1, p2];
                    let mut corner = [0usize; MAX_DIM];
                    let mut slot = 0usize;
                    for d in 0..dim {
                        let (o, s) = match self.order {
                            Order::Cubic => (p[d] >> 1, p[d] & 1),
                            Order::Linear => (p[d], 0),
                        };
                        corner[d] = o;
                        slot = (slot << 1) | s;
                    }
                    let slot = if plen == 1 { 0 } else { slot };
                    let node = self.node_of(locs, &corner);
                    coef[(p0 * n1 + p1) * n2 + p2] = self.data[node * plen + slot];
                }
            }
        }

        // Progressive contraction, last axis first.
        let o2 = if dim > 2 { no } else { 1 };
        let o1 = if dim > 1 { no } else { 1 };
        let o0 = no;
        let mut t2 = [0.0f64; 48]; // [p0][p1][a2]
        for p0 in 0..n0 {
            for p1 in 0..n1 {
                for a2 in 0..o2 {
                    let mut acc = 0.0;
                    if dim > 2 {
                        for p2 in 0..n2 {
                            acc += coef[(p0 * n1 + p1) * n2 + p2] * rows[2][a2][p2];
                        }
                    } else {
                        acc = coef[(p0 * n1 + p1) * n2];
                    }
                    t2[(p0 * n1 + p1) * o2 + a2] = acc;
                }
            }
        }
        let mut t1 = [0.0f64; 36]; // [p0][a1][a2]
        for p0 in 0..n0 {
            for a1 in 0..o1 {
                for a2 in 0..o2 {
                    let mut acc = 0.0;
                    if dim > 1 {
                        for p1 in 0..n1 {
                            acc += t2[(p0 * n1 + p1) * o2 + a2] * rows[1][a1][p1];
                        }
                    } else {
                        acc = t2[p0 * n1 * o2 + a2];
                    }
                    t1[(p0 * o1 + a1) * o2 + a2] = acc;
                }
            }
        }
        let mut out = DerivTensor::default();
        for a0 in 0..o0 {
            for a1 in 0..o1 {
                for a2 in 0..o2 {
                    let mut acc = 0.0;
                    for p0 in 0..n0 {
                        acc += t1[(p0 * o1 + a1) * o2 + a2] * rows[0][a0][p0];
                    }
                    out.d[a0][a1][a2] = acc;
                }
            }
        }
        out
    }

    pub(crate) fn locate_all(&self, x: &Point) -> Result<[AxisLoc; MAX_DIM]> {
        let mut locs = [AxisLoc { cell: 0, t: 0.0 }; MAX_DIM];
        for d in 0..self.grid.dim() {
            locs[d] = locate(&self.grid, d, x[d])?;
        }
        Ok(locs)
    }
}

/// All per-axis derivative combinations of a field at one point:
/// `d[a0][a1][a2] = ∂_x^{a0} ∂_y^{a1} ∂_z^{a2} f`. Entries beyond the
/// supported order are zero and must not be read.
#[derive(Debug, Clone, Copy, Default)]
pub struct DerivTensor {
    pub d: [[[f64; 3]; 3]; 3],
}

impl DerivTensor {
    /// Derivative for a multi-index, zero when any entry exceeds `max`.
    pub fn get_clamped(&self, gamma: &[usize; MAX_DIM], max: usize) -> f64 {
        if gamma.iter().any(|&g| g > max) {
            0.0
        } else {
            self.d[gamma[0]][gamma[1]][gamma[2]]
        }
    }
}
