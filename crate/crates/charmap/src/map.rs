//! Characteristic maps as vector-valued Hermite fields.
//!
//! A map is stored as displacement from identity, one scalar interpolant per
//! component, so periodic wrapping stays well defined and the identity map is
//! exactly representable. Long-time maps are factored into chains of submaps
//! reset at remap times.

use crate::error::{CmError, Result};
use crate::field::{AxisLoc, HermiteField, Order};
use crate::grid::{axis_distance, wrap_unit, Boundary, GridSpec, Point, MAX_DIM};
use crate::jet::{delta_of, packet_slot_to_mask, taylor_compose, Jet, TaylorTable};
use rayon::prelude::*;

/// Time orientation of a submap chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// A velocity field frozen in time, with enough derivative information to
/// assemble Hermite packets of one-step maps.
pub trait Velocity: Sync {
    fn dim(&self) -> usize;

    /// Velocity vector at `x`; entries beyond `dim` are zero.
    fn value(&self, x: &Point) -> Result<Point>;

    /// Component jets at `x` (value plus mixed first partials).
    fn jet(&self, x: &Point) -> Result<[Jet; MAX_DIM]>;

    /// Sup-norm estimate used for substep selection.
    fn max_abs(&self) -> f64;
}

/// Identically zero velocity.
pub struct ZeroVelocity(pub usize);

impl Velocity for ZeroVelocity {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _x: &Point) -> Result<Point> {
        Ok([0.0; MAX_DIM])
    }
    fn jet(&self, _x: &Point) -> Result<[Jet; MAX_DIM]> {
        Ok([Jet::zero(self.0); MAX_DIM])
    }
    fn max_abs(&self) -> f64 {
        0.0
    }
}

/// Constant velocity.
pub struct ConstantVelocity {
    pub dim: usize,
    pub v: Point,
}

impl Velocity for ConstantVelocity {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &Point) -> Result<Point> {
        Ok(self.v)
    }
    fn jet(&self, _x: &Point) -> Result<[Jet; MAX_DIM]> {
        let mut out = [Jet::zero(self.dim); MAX_DIM];
        for d in 0..self.dim {
            out[d] = Jet::constant(self.dim, self.v[d]);
        }
        Ok(out)
    }
    fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Anything that maps domain points to domain points.
pub trait DomainMap: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &Point) -> Result<Point>;
    /// Per-axis boundary tags, if the map carries a grid.
    fn domain_bcs(&self) -> Option<[Boundary; MAX_DIM]>;
}

/// Maps that also provide their Jacobian, for pullbacks and area elements.
pub trait JacobianMap: Sync {
    fn jac_dim(&self) -> usize;
    fn apply_with_jacobian(&self, x: &Point) -> Result<(Point, [[f64; 3]; 3])>;

    fn jacobian_det(&self, x: &Point) -> Result<f64> {
        let (_, j) = self.apply_with_jacobian(x)?;
        Ok(det_dim(&j, self.jac_dim()))
    }
}

/// Vector-valued Hermite interpolant representing `x ↦ x + displacement(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapField {
    grid: GridSpec,
    order: Order,
    comps: Vec<HermiteField>,
}

/// Result of one `advance` call: the updated map and the projection residual
/// accumulated over the substeps on the fixed sample set.
pub struct AdvanceOut {
    pub map: MapField,
    pub residual: f64,
}

impl MapField {
    /// The identity map: all displacement packets zero.
    pub fn identity(grid: &GridSpec, order: Order) -> Self {
        let comps = (0..grid.dim())
            .map(|_| HermiteField::zeros(grid, order))
            .collect();
        Self { grid: grid.clone(), order, comps }
    }

    pub fn from_components(grid: &GridSpec, order: Order, comps: Vec<HermiteField>) -> Result<Self> {
        if comps.len() != grid.dim() || comps.iter().any(|c| c.grid() != grid || c.order() != order) {
            return Err(CmError::DomainMismatch);
        }
        Ok(Self { grid: grid.clone(), order, comps })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn components(&self) -> &[HermiteField] {
        &self.comps
    }

    pub fn is_identity(&self) -> bool {
        self.comps
            .iter()
            .all(|c| c.raw_data().iter().all(|&v| v == 0.0))
    }

    fn locate(&self, x: &Point) -> Result<[AxisLoc; MAX_DIM]> {
        self.comps[0].locate_all(x)
    }

    /// Wrap / clamp a mapped position into the domain. Neumann excursions up
    /// to one cell are clamped; larger ones signal a CFL violation.
    fn confine(&self, mut p: Point) -> Result<Point> {
        for d in 0..self.grid.dim() {
            let ax = self.grid.axis(d);
            match ax.bc {
                Boundary::Periodic => p[d] = wrap_unit(p[d]),
                Boundary::Neumann => {
                    if p[d] < -ax.h || p[d] > 1.0 + ax.h {
                        return Err(CmError::CflViolation { axis: d, value: p[d] });
                    }
                    p[d] = p[d].clamp(0.0, 1.0);
                }
            }
        }
        Ok(p)
    }

    /// Displacement vector at `x`.
    pub fn displacement(&self, x: &Point) -> Result<Point> {
        let locs = self.locate(x)?;
        let mut d = [0.0; MAX_DIM];
        for (k, c) in self.comps.iter().enumerate() {
            d[k] = c.eval_located(&locs, &[0; MAX_DIM]);
        }
        Ok(d)
    }

    /// Evaluate the map: `x + displacement(x)`, confined to the domain.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        let d = self.displacement(x)?;
        let mut p = *x;
        for k in 0..self.grid.dim() {
            p[k] += d[k];
        }
        self.confine(p)
    }

    /// Map value together with its Jacobian `I + ∇displacement` at `x`.
    pub fn apply_with_jacobian(&self, x: &Point) -> Result<(Point, [[f64; 3]; 3])> {
        let dim = self.grid.dim();
        let locs = self.locate(x)?;
        let mut jac = [[0.0; 3]; 3];
        let mut p = *x;
        for k in 0..dim {
            let derivs = self.comps[k].eval_all_derivs(&locs);
            p[k] += derivs.d[0][0][0];
            for (d, row) in jac[k].iter_mut().enumerate().take(dim) {
                let mut g = [0usize; MAX_DIM];
                g[d] = 1;
                *row = derivs.d[g[0]][g[1]][g[2]] + if d == k { 1.0 } else { 0.0 };
            }
        }
        Ok((self.confine(p)?, jac))
    }

    /// Determinant of `I + ∇displacement` at `x`. May be nonpositive for
    /// degenerate maps; callers treat that as a singularity diagnostic.
    pub fn jacobian_det(&self, x: &Point) -> Result<f64> {
        let (_, jac) = self.apply_with_jacobian(x)?;
        Ok(det_dim(&jac, self.grid.dim()))
    }

    /// Displacement jets of the map at `x`: value plus all mixed first
    /// partials per component, identity part excluded.
    pub fn displacement_jets(&self, x: &Point) -> Result<[Jet; MAX_DIM]> {
        let dim = self.grid.dim();
        let locs = self.locate(x)?;
        let mut jets = [Jet::zero(dim); MAX_DIM];
        for k in 0..dim {
            let mut j = Jet::zero(dim);
            let derivs = self.comps[k].eval_all_derivs(&locs);
            for slot in 0..(1usize << dim) {
                let mask = packet_slot_to_mask(slot, dim);
                let mut g = [0usize; MAX_DIM];
                for d in 0..dim {
                    g[d] = (slot >> (dim - 1 - d)) & 1;
                }
                j.s[mask] = derivs.d[g[0]][g[1]][g[2]];
            }
            jets[k] = j;
        }
        Ok(jets)
    }

    /// Position jets at `x` (identity plus displacement).
    pub fn position_jets(&self, x: &Point) -> Result<[Jet; MAX_DIM]> {
        let dim = self.grid.dim();
        let mut jets = self.displacement_jets(x)?;
        for (k, j) in jets.iter_mut().enumerate().take(dim) {
            *j = Jet::variable(dim, x[k], k).add(j);
        }
        Ok(jets)
    }

    /// Semi-Lagrangian update: Hermite projection of
    /// `self ∘ (x - (dt/substeps)·u(x))`, applied `substeps` times with the
    /// same frozen velocity.
    pub fn advance(&self, u: &dyn Velocity, dt: f64, substeps: usize) -> Result<AdvanceOut> {
        assert!(dt > 0.0 && substeps >= 1);
        let dim = self.grid.dim();
        let tau = dt / substeps as f64;
        let nodes = self.grid.node_count();

        // One-step data is identical across substeps: cache per node.
        enum StepData {
            Values(Vec<Point>),
            Jets(Vec<[Jet; MAX_DIM]>),
        }
        let step: StepData = match self.order {
            Order::Linear => {
                let vals = (0..nodes)
                    .into_par_iter()
                    .map(|lin| {
                        let x = self.grid.node_pos_lin(lin);
                        let v = u.value(&x)?;
                        let mut foot = x;
                        for d in 0..dim {
                            foot[d] -= tau * v[d];
                        }
                        Ok(foot)
                    })
                    .collect::<Result<Vec<_>>>()?;
                StepData::Values(vals)
            }
            Order::Cubic => {
                let jets = (0..nodes)
                    .into_par_iter()
                    .map(|lin| {
                        let x = self.grid.node_pos_lin(lin);
                        let vj = u.jet(&x)?;
                        let mut out = [Jet::zero(dim); MAX_DIM];
                        for d in 0..dim {
                            out[d] = vj[d].scale(-tau);
                        }
                        Ok(out)
                    })
                    .collect::<Result<Vec<_>>>()?;
                StepData::Jets(jets)
            }
        };

        let samples = crate::halton::sample_set(dim, crate::halton::RESIDUAL_SAMPLES);
        let mut current = self.clone();
        let mut residual = 0.0;
        for _ in 0..substeps {
            let next = match &step {
                StepData::Values(feet) => current.composed_values(&self.grid, feet)?,
                StepData::Jets(jets) => current.compose_with_inner_disp_jets(&self.grid, jets)?,
            };
            // projection defect of this substep on the fixed sample set
            let sub_res = samples
                .par_iter()
                .map(|s| {
                    let v = u.value(s)?;
                    let mut foot = *s;
                    for d in 0..dim {
                        foot[d] -= tau * v[d];
                    }
                    let direct = current.apply(&current.confine(foot)?)?;
                    let projected = next.apply(s)?;
                    let mut e = 0.0f64;
                    for d in 0..dim {
                        e = e.max(axis_distance(direct[d], projected[d], self.grid.axis(d).bc));
                    }
                    Ok::<f64, CmError>(e)
                })
                .try_reduce(|| 0.0f64, |a, b| Ok(a.max(b)))?;
            residual += sub_res;
            current = next;
        }
        Ok(AdvanceOut { map: current, residual })
    }

    /// Packets of `self ∘ inner` on the nodes of `target`, where inner is
    /// given by its foot values at those nodes (linear order: value slots
    /// only).
    fn composed_values(&self, target: &GridSpec, feet: &[Point]) -> Result<MapField> {
        let dim = target.dim();
        let nodes = target.node_count();
        let rows: Vec<Point> = (0..nodes)
            .into_par_iter()
            .map(|lin| {
                let x = target.node_pos_lin(lin);
                let foot = self.confine(feet[lin])?;
                let d_out = self.displacement(&foot)?;
                let mut disp = [0.0; MAX_DIM];
                for k in 0..dim {
                    disp[k] = (feet[lin][k] - x[k]) + d_out[k];
                }
                Ok(disp)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut data: Vec<Vec<f64>> = vec![vec![0.0; nodes]; dim];
        for (lin, disp) in rows.into_iter().enumerate() {
            for (k, comp) in data.iter_mut().enumerate() {
                comp[lin] = disp[k];
            }
        }
        let comps = data
            .into_iter()
            .map(|d| HermiteField::from_raw(target, Order::Linear, d))
            .collect::<Result<Vec<_>>>()?;
        MapField::from_components(target, Order::Linear, comps)
    }

    /// Packets of `self ∘ inner` on the nodes of `target`, from the inner
    /// map's displacement jets at those nodes (cubic order). The chain rule
    /// uses the outer interpolant's derivatives up to entry `m + 1`; higher
    /// entries are dropped. Working with displacements keeps composition
    /// with the identity exact.
    pub fn compose_with_inner_disp_jets(
        &self,
        target: &GridSpec,
        inner_disp: &[[Jet; MAX_DIM]],
    ) -> Result<MapField> {
        let dim = target.dim();
        let nodes = target.node_count();
        let plen = 1usize << dim;
        let maxd = self.order.max_deriv();
        let packets: Vec<[[f64; 8]; MAX_DIM]> = (0..nodes)
            .into_par_iter()
            .map(|lin| {
                let x = target.node_pos_lin(lin);
                let disp = &inner_disp[lin];
                let mut foot = [0.0; MAX_DIM];
                for d in 0..dim {
                    foot[d] = x[d] + disp[d].value();
                }
                let foot = self.confine(foot)?;
                let locs = self.comps[0].locate_all(&foot)?;
                // position deltas: ε_d seed plus the displacement slots
                let mut deltas = [Jet::zero(dim); MAX_DIM];
                for d in 0..dim {
                    let mut dj = delta_of(&disp[d]);
                    dj.s[1 << d] += 1.0;
                    deltas[d] = dj;
                }
                let mut out = [[0.0f64; 8]; MAX_DIM];
                for k in 0..dim {
                    let derivs = self.comps[k].eval_all_derivs(&locs);
                    let table = TaylorTable::from_derivs(&derivs, dim, maxd);
                    let dout = taylor_compose(&table, &deltas, dim);
                    let total = disp[k].add(&dout);
                    for slot in 0..plen {
                        let mask = packet_slot_to_mask(slot, dim);
                        let mut scale = 1.0;
                        for d in 0..dim {
                            if (slot >> (dim - 1 - d)) & 1 == 1 {
                                scale *= target.axis(d).h;
                            }
                        }
                        out[k][slot] = total.s[mask] * scale;
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::cubic_from_packets(target, packets)
    }

    fn cubic_from_packets(target: &GridSpec, packets: Vec<[[f64; 8]; MAX_DIM]>) -> Result<MapField> {
        let dim = target.dim();
        let plen = 1usize << dim;
        let nodes = target.node_count();
        let mut data: Vec<Vec<f64>> = vec![vec![0.0; nodes * plen]; dim];
        for (lin, p) in packets.into_iter().enumerate() {
            for (k, comp) in data.iter_mut().enumerate() {
                comp[lin * plen..(lin + 1) * plen].copy_from_slice(&p[k][..plen]);
            }
        }
        let comps = data
            .into_iter()
            .map(|d| HermiteField::from_raw(target, Order::Cubic, d))
            .collect::<Result<Vec<_>>>()?;
        MapField::from_components(target, Order::Cubic, comps)
    }

    /// Build a cubic map from per-node position jets (for example from a
    /// high-order one-step integrator).
    pub fn from_position_jets(
        target: &GridSpec,
        jets: impl Fn(usize, &Point) -> Result<[Jet; MAX_DIM]> + Sync,
    ) -> Result<MapField> {
        let dim = target.dim();
        let plen = 1usize << dim;
        let packets: Vec<[[f64; 8]; MAX_DIM]> = (0..target.node_count())
            .into_par_iter()
            .map(|lin| {
                let x = target.node_pos_lin(lin);
                let pj = jets(lin, &x)?;
                let mut out = [[0.0f64; 8]; MAX_DIM];
                for k in 0..dim {
                    let disp = pj[k].sub(&Jet::variable(dim, x[k], k));
                    for slot in 0..plen {
                        let mask = packet_slot_to_mask(slot, dim);
                        let mut scale = 1.0;
                        for d in 0..dim {
                            if (slot >> (dim - 1 - d)) & 1 == 1 {
                                scale *= target.axis(d).h;
                            }
                        }
                        out[k][slot] = disp.s[mask] * scale;
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::cubic_from_packets(target, packets)
    }

    /// Hermite projection of `outer ∘ inner` onto the grid of `inner`.
    ///
    /// The grids may differ but must share dimension and boundary signature.
    pub fn compose_project(outer: &MapField, inner: &MapField) -> Result<MapField> {
        if !outer.grid.same_domain(&inner.grid) {
            return Err(CmError::DomainMismatch);
        }
        let dim = inner.grid.dim();
        let nodes = inner.grid.node_count();
        match inner.order {
            Order::Linear => {
                let feet: Vec<Point> = (0..nodes)
                    .into_par_iter()
                    .map(|lin| {
                        let x = inner.grid.node_pos_lin(lin);
                        let d = inner.displacement(&x)?;
                        let mut foot = x;
                        for k in 0..dim {
                            foot[k] += d[k];
                        }
                        Ok(foot)
                    })
                    .collect::<Result<Vec<_>>>()?;
                outer.composed_values(&inner.grid, &feet)
            }
            Order::Cubic => {
                let jets: Vec<[Jet; MAX_DIM]> = (0..nodes)
                    .into_par_iter()
                    .map(|lin| {
                        let x = inner.grid.node_pos_lin(lin);
                        inner.displacement_jets(&x)
                    })
                    .collect::<Result<Vec<_>>>()?;
                outer.compose_with_inner_disp_jets(&inner.grid, &jets)
            }
        }
    }
}

impl DomainMap for MapField {
    fn dim(&self) -> usize {
        self.grid.dim()
    }
    fn apply(&self, x: &Point) -> Result<Point> {
        MapField::apply(self, x)
    }
    fn domain_bcs(&self) -> Option<[Boundary; MAX_DIM]> {
        let mut bcs = [Boundary::Periodic; MAX_DIM];
        for d in 0..self.grid.dim() {
            bcs[d] = self.grid.axis(d).bc;
        }
        Some(bcs)
    }
}

impl JacobianMap for MapField {
    fn jac_dim(&self) -> usize {
        self.grid.dim()
    }
    fn apply_with_jacobian(&self, x: &Point) -> Result<(Point, [[f64; 3]; 3])> {
        MapField::apply_with_jacobian(self, x)
    }
}

impl JacobianMap for SubmapChain {
    fn jac_dim(&self) -> usize {
        self.maps.first().map_or(0, |m| m.grid().dim())
    }
    fn apply_with_jacobian(&self, x: &Point) -> Result<(Point, [[f64; 3]; 3])> {
        SubmapChain::apply_with_jacobian(self, x)
    }
}

/// Determinant of the leading `dim × dim` block.
pub fn det_dim(j: &[[f64; 3]; 3], dim: usize) -> f64 {
    match dim {
        1 => j[0][0],
        2 => j[0][0] * j[1][1] - j[0][1] * j[1][0],
        _ => {
            j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
        }
    }
}

/// Ordered composition of submaps with remap timestamps.
#[derive(Debug, Clone)]
pub struct SubmapChain {
    maps: Vec<MapField>,
    times: Vec<f64>,
    direction: Direction,
}

impl SubmapChain {
    pub fn new(direction: Direction, t0: f64) -> Self {
        Self { maps: Vec::new(), times: vec![t0], direction }
    }

    pub fn from_parts(maps: Vec<MapField>, times: Vec<f64>, direction: Direction) -> Result<Self> {
        if times.len() != maps.len() + 1 {
            return Err(CmError::Format(format!(
                "chain needs {} timestamps for {} maps, got {}",
                maps.len() + 1,
                maps.len(),
                times.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CmError::Format("chain timestamps must increase".into()));
        }
        Ok(Self { maps, times, direction })
    }

    pub fn push(&mut self, map: MapField, t_end: f64) {
        assert!(
            t_end > *self.times.last().unwrap(),
            "remap times must increase"
        );
        self.maps.push(map);
        self.times.push(t_end);
    }

    pub fn maps(&self) -> &[MapField] {
        &self.maps
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn set_direction(&mut self, d: Direction) {
        self.direction = d;
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    fn ordered(&self) -> Box<dyn Iterator<Item = &MapField> + '_> {
        match self.direction {
            // Backward maps compose with the latest interval applied first.
            Direction::Backward => Box::new(self.maps.iter().rev()),
            Direction::Forward => Box::new(self.maps.iter()),
        }
    }

    /// Nested evaluation in the order dictated by the direction. An empty
    /// chain acts as the identity.
    pub fn apply(&self, x: &Point) -> Result<Point> {
        let mut p = *x;
        for m in self.ordered() {
            p = m.apply(&p)?;
        }
        Ok(p)
    }

    /// Evaluation together with the accumulated Jacobian (chain rule).
    pub fn apply_with_jacobian(&self, x: &Point) -> Result<(Point, [[f64; 3]; 3])> {
        let dim = self.maps.first().map_or(MAX_DIM, |m| m.grid().dim());
        let mut p = *x;
        let mut jac = [[0.0; 3]; 3];
        for (d, row) in jac.iter_mut().enumerate() {
            row[d] = 1.0;
        }
        for m in self.ordered() {
            let (q, j) = m.apply_with_jacobian(&p)?;
            jac = mat_mul(&j, &jac, dim);
            p = q;
        }
        Ok((p, jac))
    }

    /// Product of submap Jacobian determinants along the evaluation.
    pub fn jacobian_det(&self, x: &Point) -> Result<f64> {
        let dim = self.maps.first().map_or(MAX_DIM, |m| m.grid().dim());
        let (_, jac) = self.apply_with_jacobian(x)?;
        Ok(det_dim(&jac, dim))
    }
}

impl DomainMap for SubmapChain {
    fn dim(&self) -> usize {
        self.maps.first().map_or(0, |m| m.grid().dim())
    }
    fn apply(&self, x: &Point) -> Result<Point> {
        SubmapChain::apply(self, x)
    }
    fn domain_bcs(&self) -> Option<[Boundary; MAX_DIM]> {
        self.maps.first().and_then(|m| m.domain_bcs())
    }
}

pub fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3], dim: usize) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = 0.0;
            for (k, bk) in b.iter().enumerate().take(dim) {
                acc += a[i][k] * bk[j];
            }
            out[i][j] = acc;
        }
    }
    for d in dim..3 {
        out[d][d] = 1.0;
    }
    out
}

/// Maximum forward/backward composition defect over a sample set:
/// `max(‖fwd(bwd(x)) - x‖_∞, ‖bwd(fwd(x)) - x‖_∞)` with distances wrapped
/// on periodic axes.
pub fn composition_error(
    fwd: &dyn DomainMap,
    bwd: &dyn DomainMap,
    samples: &[Point],
) -> Result<f64> {
    if samples.is_empty() {
        return Err(CmError::EmptySamples);
    }
    let bcs = fwd
        .domain_bcs()
        .or_else(|| bwd.domain_bcs())
        .unwrap_or([Boundary::Periodic; MAX_DIM]);
    let dim = fwd.dim().max(bwd.dim()).max(1);
    let mut worst = 0.0f64;
    for s in samples {
        let a = fwd.apply(&bwd.apply(s)?)?;
        let b = bwd.apply(&fwd.apply(s)?)?;
        for d in 0..dim {
            worst = worst.max(axis_distance(a[d], s[d], bcs[d]));
            worst = worst.max(axis_distance(b[d], s[d], bcs[d]));
        }
    }
    Ok(worst)
}
