//! Density transport by the diffusion velocity: pullback onto the dual grid,
//! implicit Euler smoothing, `u = -∇ log ρ̃`, and the stepping loop that
//! evolves the backward characteristic map, with submap remapping driven by
//! the accumulated projection residual.

use crate::density::{l2_energy, pullback_density, DensityField, DensityFn};
use crate::error::{CmError, Result};
use crate::field::{HermiteField, Order};
use crate::grid::{DualGrid, GridSpec, Point, MAX_DIM};
use crate::jet::{packet_slot_to_mask, Jet};
use crate::map::{Direction, JacobianMap, MapField, SubmapChain, Velocity};
use crate::spectral::SpectralOps;

/// Abort threshold: smoothed densities this close to zero make the
/// log-gradient meaningless and indicate a resolution/CFL failure.
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// Advective CFL fraction for map-update substeps.
const CFL_FRACTION: f64 = 0.5;

/// One energy-trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub mass: f64,
}

/// Output of a heat-flow run: the final working submap, the chain covering
/// the whole interval, and the per-step energy trace.
#[derive(Debug, Clone)]
pub struct HeatFlowResult {
    pub map: MapField,
    pub chain: SubmapChain,
    pub energy_trace: Vec<TraceRow>,
}

/// The diffusion velocity `u(x) = -∇ H_D[log ρ̃](x)` as a frozen-in-time
/// velocity field. For cubic interpolants the derivative packets of
/// `H_D[log ρ̃]` come from spectral differentiation at the dual nodes.
pub struct DiffusionVelocity {
    field: HermiteField,
    dim: usize,
    max_abs: f64,
}

impl DiffusionVelocity {
    pub fn field(&self) -> &HermiteField {
        &self.field
    }
}

impl Velocity for DiffusionVelocity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Point) -> Result<Point> {
        let locs = self.field.locate_all(x)?;
        let mut v = [0.0; MAX_DIM];
        for d in 0..self.dim {
            let mut alpha = [0usize; MAX_DIM];
            alpha[d] = 1;
            v[d] = -self.field.eval_located(&locs, &alpha);
        }
        Ok(v)
    }

    fn jet(&self, x: &Point) -> Result<[Jet; MAX_DIM]> {
        let locs = self.field.locate_all(x)?;
        let derivs = self.field.eval_all_derivs(&locs);
        let maxd = self.field.order().max_deriv();
        let mut out = [Jet::zero(self.dim); MAX_DIM];
        for k in 0..self.dim {
            let mut j = Jet::zero(self.dim);
            for slot in 0..(1usize << self.dim) {
                let mask = packet_slot_to_mask(slot, self.dim);
                let mut g = [0usize; MAX_DIM];
                for d in 0..self.dim {
                    g[d] = (slot >> (self.dim - 1 - d)) & 1;
                }
                g[k] += 1;
                j.s[mask] = -derivs.get_clamped(&g, maxd);
            }
            out[k] = j;
        }
        Ok(out)
    }

    fn max_abs(&self) -> f64 {
        self.max_abs
    }
}

/// Build the diffusion velocity from a smoothed density.
pub fn diffusion_velocity(
    rho: &DensityField,
    order: Order,
    ops: &SpectralOps,
) -> Result<DiffusionVelocity> {
    let dual = rho.dual();
    let g = dual.grid().clone();
    let dim = g.dim();
    let n = g.node_count();
    let mut logv = Vec::with_capacity(n);
    for &v in rho.values() {
        if !(v > 0.0) {
            return Err(CmError::NonPositiveDensity { value: v });
        }
        logv.push(v.ln());
    }

    let field = match order {
        Order::Linear => HermiteField::from_raw(&g, Order::Linear, logv.clone())?,
        Order::Cubic => {
            // spectral derivative data per packet slot, reusing lower slots
            let plen = 1usize << dim;
            let mut slot_data: Vec<Option<Vec<f64>>> = vec![None; plen];
            slot_data[0] = Some(logv.clone());
            for mask in 1..plen {
                let low = mask.trailing_zeros() as usize;
                let rest = mask & !(1 << low);
                let basis = slot_data[rest].as_ref().unwrap();
                slot_data[mask] = Some(ops.axis_derivative(&g, basis, low));
            }
            let mut data = vec![0.0; n * plen];
            for s in 0..plen {
                let mask = packet_slot_to_mask(s, dim);
                let mut scale = 1.0;
                for d in 0..dim {
                    if (s >> (dim - 1 - d)) & 1 == 1 {
                        scale *= g.axis(d).h;
                    }
                }
                let src = slot_data[mask].as_ref().unwrap();
                for (node, &v) in src.iter().enumerate() {
                    data[node * plen + s] = v * scale;
                }
            }
            HermiteField::from_raw(&g, Order::Cubic, data)?
        }
    };

    // sup-norm estimate of the gradient from nodal data
    let max_abs = match order {
        Order::Cubic => {
            let plen = 1usize << dim;
            let mut m = 0.0f64;
            for d in 0..dim {
                let slot = 1usize << (dim - 1 - d);
                let h = g.axis(d).h;
                for node in 0..n {
                    m = m.max((field.raw_data()[node * plen + slot] / h).abs());
                }
            }
            m
        }
        Order::Linear => {
            let mut m = 0.0f64;
            for d in 0..dim {
                let ax = g.axis(d);
                for lin in 0..n {
                    let idx = g.unindex(lin);
                    if idx[d] + 1 < ax.n {
                        let mut up = idx;
                        up[d] += 1;
                        let diff = (logv[g.index(&up)] - logv[lin]) / ax.h;
                        m = m.max(diff.abs());
                    }
                }
            }
            m
        }
    };

    Ok(DiffusionVelocity { field, dim, max_abs })
}

/// Implicit Euler step of the heat equation on the dual grid:
/// `ρ̃ = (I - dt·Δ)^{-1} ρ`, exact in the transform basis.
pub fn implicit_heat(rho: &DensityField, dt_heat: f64, ops: &SpectralOps) -> Result<DensityField> {
    assert!(dt_heat > 0.0);
    let smoothed = ops.screened_poisson(rho.dual().grid(), rho.values(), dt_heat);
    let (out, _) = DensityField::normalized(rho.dual(), smoothed)?;
    Ok(out)
}

/// View of the full accumulated map: archived chain plus working submap.
/// The working map is the latest interval, so it is applied first.
pub struct FullMap<'a> {
    pub chain: &'a SubmapChain,
    pub current: &'a MapField,
}

impl JacobianMap for FullMap<'_> {
    fn jac_dim(&self) -> usize {
        self.current.grid().dim()
    }
    fn apply_with_jacobian(&self, x: &Point) -> Result<(Point, [[f64; 3]; 3])> {
        let (p, j1) = self.current.apply_with_jacobian(x)?;
        let (q, j2) = self.chain.apply_with_jacobian(&p)?;
        Ok((q, crate::map::mat_mul(&j2, &j1, self.jac_dim())))
    }
}

impl crate::map::DomainMap for FullMap<'_> {
    fn dim(&self) -> usize {
        self.current.grid().dim()
    }
    fn apply(&self, x: &Point) -> Result<Point> {
        self.chain.apply(&self.current.apply(x)?)
    }
    fn domain_bcs(&self) -> Option<[crate::grid::Boundary; MAX_DIM]> {
        crate::map::DomainMap::domain_bcs(self.current)
    }
}

/// Stepping state for diffusion-driven redistribution. Drivers feed it one
/// implicit-Euler step at a time and may swap the base density between steps
/// (moving-density and surface problems).
pub struct HeatFlowEngine {
    grid: GridSpec,
    dual: DualGrid,
    order: Order,
    delta_remap: f64,
    ops: SpectralOps,
    chain: SubmapChain,
    current: MapField,
    residual: f64,
    trace: Vec<TraceRow>,
}

impl HeatFlowEngine {
    pub fn new(grid: &GridSpec, order: Order, delta_remap: f64) -> Result<Self> {
        let dual = grid.dual()?;
        Ok(Self {
            grid: grid.clone(),
            dual,
            order,
            delta_remap,
            ops: SpectralOps::new(),
            chain: SubmapChain::new(Direction::Backward, 0.0),
            current: MapField::identity(grid, order),
            residual: 0.0,
            trace: Vec::new(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dual(&self) -> &DualGrid {
        &self.dual
    }

    pub fn chain(&self) -> &SubmapChain {
        &self.chain
    }

    pub fn current(&self) -> &MapField {
        &self.current
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn full_map(&self) -> FullMap<'_> {
        FullMap { chain: &self.chain, current: &self.current }
    }

    /// Number of archived submaps.
    pub fn remap_count(&self) -> usize {
        self.chain.len()
    }

    /// Pull the base density back through the accumulated map.
    pub fn pullback(&self, rho0: &dyn DensityFn) -> Result<(DensityField, f64)> {
        pullback_density(rho0, &self.full_map(), &self.dual)
    }

    /// One step: pullback, implicit heat, diffusion velocity, map update.
    /// `t_label` stamps the trace row and any remap this step triggers.
    pub fn step(&mut self, rho0: &dyn DensityFn, dt: f64, t_start: f64, t_label: f64) -> Result<()> {
        let (rho, raw_mass) = self.pullback(rho0)?;
        self.trace.push(TraceRow {
            t: t_start,
            energy: l2_energy(&rho),
            rho_min: rho.min(),
            rho_max: rho.max(),
            mass: raw_mass,
        });

        let smoothed = implicit_heat(&rho, dt, &self.ops)?;
        let min = smoothed.min();
        if min <= POSITIVITY_FLOOR {
            return Err(CmError::PositivityLost { min });
        }
        let vel = diffusion_velocity(&smoothed, self.order, &self.ops)?;

        let h_min = self.grid.h_min();
        let substeps = ((vel.max_abs() * dt / (CFL_FRACTION * h_min)).ceil() as usize).max(1);
        let out = self.current.advance(&vel, dt, substeps)?;
        self.current = out.map;
        self.residual += out.residual;

        if self.residual > self.delta_remap {
            self.archive(t_label);
        }
        Ok(())
    }

    /// Archive the working submap at time `t` and reset it to identity.
    pub fn archive(&mut self, t: f64) {
        if t <= *self.chain.times().last().unwrap() {
            return;
        }
        let map = std::mem::replace(&mut self.current, MapField::identity(&self.grid, self.order));
        self.chain.push(map, t);
        self.residual = 0.0;
    }

    /// Record a final trace row and close the chain at time `t_end`.
    pub fn finish(&mut self, rho0: &dyn DensityFn, t_end: f64) -> Result<HeatFlowResult> {
        let (rho, raw_mass) = self.pullback(rho0)?;
        self.trace.push(TraceRow {
            t: t_end,
            energy: l2_energy(&rho),
            rho_min: rho.min(),
            rho_max: rho.max(),
            mass: raw_mass,
        });
        let map = self.current.clone();
        if !self.current.is_identity() || self.chain.is_empty() {
            self.archive(t_end);
        }
        Ok(HeatFlowResult {
            map,
            chain: self.chain.clone(),
            energy_trace: self.trace.clone(),
        })
    }

    /// Deviation of the current transported density from uniform:
    /// `‖ρ - 1‖_{L²} = sqrt(2 E)`.
    pub fn l2_deviation(&self, rho0: &dyn DensityFn) -> Result<f64> {
        let (rho, _) = self.pullback(rho0)?;
        Ok((2.0 * l2_energy(&rho)).sqrt())
    }
}

/// Algorithm: evolve the backward map of the diffusion velocity for the
/// fixed base density `rho0` over `[0, t_final]` with step `dt`.
pub fn heat_flow_map(
    rho0: &dyn DensityFn,
    t_final: f64,
    dt: f64,
    grid: &GridSpec,
    order: Order,
    delta_remap: f64,
) -> Result<HeatFlowResult> {
    assert!(t_final > 0.0 && dt > 0.0);
    let mut engine = HeatFlowEngine::new(grid, order, delta_remap)?;
    let mut t = 0.0;
    while t < t_final - 1e-12 {
        let step = dt.min(t_final - t);
        engine.step(rho0, step, t, t + step)?;
        t += step;
    }
    engine.finish(rho0, t_final)
}

/// Result of redistributing a moving density: the accumulated chain plus the
/// per-outer-step deviation `‖ρ(·,t) - 1‖_{L²}` after redistribution.
#[derive(Debug, Clone)]
pub struct MovingRedistResult {
    pub chain: SubmapChain,
    pub map: MapField,
    pub deviations: Vec<(f64, f64)>,
    pub max_deviation: f64,
}

/// A time-dependent strictly positive density.
pub trait MovingDensity: Sync {
    fn density_at(&self, x: &Point, t: f64) -> f64;
}

struct Frozen<'a> {
    f: &'a dyn MovingDensity,
    t: f64,
}

impl DensityFn for Frozen<'_> {
    fn density(&self, x: &Point) -> f64 {
        self.f.density_at(x, self.t)
    }
}

/// Redistribution of an evolving density: per outer step the current
/// `ρ0(·, t_n)` replaces the base density, then the diffusion flow runs for
/// local time `ν·dt` and composes into the chain.
pub fn redistribute_moving(
    rho0t: &dyn MovingDensity,
    nu: f64,
    t_final: f64,
    dt: f64,
    grid: &GridSpec,
    order: Order,
    delta_remap: f64,
) -> Result<MovingRedistResult> {
    assert!(nu > 0.0 && t_final > 0.0 && dt > 0.0);
    let mut engine = HeatFlowEngine::new(grid, order, delta_remap)?;
    let inner_steps = nu.ceil().max(1.0) as usize;
    let inner_dt = nu * dt / inner_steps as f64;
    let mut deviations = Vec::new();
    let mut max_dev = 0.0f64;

    let steps = (t_final / dt).round() as usize;
    for n in 0..steps {
        let t_n = n as f64 * dt;
        let frozen = Frozen { f: rho0t, t: t_n };
        for j in 0..inner_steps {
            let t_now = t_n + (j as f64 / inner_steps as f64) * dt;
            let t_next = t_n + ((j + 1) as f64 / inner_steps as f64) * dt;
            engine.step(&frozen, inner_dt, t_now, t_next)?;
        }
        let dev = engine.l2_deviation(&frozen)?;
        deviations.push((t_n + dt, dev));
        max_dev = max_dev.max(dev);
    }
    let map = engine.current().clone();
    let frozen = Frozen { f: rho0t, t: t_final };
    let result = engine.finish(&frozen, t_final)?;
    Ok(MovingRedistResult {
        chain: result.chain,
        map,
        deviations,
        max_deviation: max_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_keeps_identity_map_and_zero_energy() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let rho0 = |_x: &Point| 1.0;
        let out = heat_flow_map(&rho0, 0.05, 0.01, &g, Order::Cubic, 1e-3).unwrap();
        assert!(out.map.is_identity());
        for row in &out.energy_trace {
            assert!(row.energy.abs() < 1e-28);
            assert!((row.mass - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cosine_density_energy_decays_monotonically() {
        let g = GridSpec::periodic(1, 64).unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        let rho0 = move |x: &Point| 1.0 + 0.4 * (tp * x[0]).cos();
        let dt = 0.1 / 64.0;
        let out = heat_flow_map(&rho0, 0.2, dt, &g, Order::Cubic, 1e-3).unwrap();
        let tr = &out.energy_trace;
        assert!(tr.len() > 10);
        for w in tr.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-10, "{w:?}");
        }
        assert!(tr.last().unwrap().energy < 0.2 * tr[0].energy);
    }

    #[test]
    fn diffusion_velocity_of_uniform_density_is_zero() {
        let g = GridSpec::periodic(2, 16).unwrap();
        let dual = g.dual().unwrap();
        let ops = SpectralOps::new();
        let (rho, _) = DensityField::normalized(&dual, vec![3.0; dual.node_count()]).unwrap();
        let vel = diffusion_velocity(&rho, Order::Cubic, &ops).unwrap();
        let v = vel.value(&[0.3, 0.7, 0.0]).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 0.0);
        assert_eq!(vel.max_abs(), 0.0);
    }

    #[test]
    fn diffusion_velocity_matches_analytic_log_gradient() {
        let g = GridSpec::periodic(1, 128).unwrap();
        let dual = g.dual().unwrap();
        let ops = SpectralOps::new();
        let tp = 2.0 * std::f64::consts::PI;
        let eps = 0.2;
        let vals: Vec<f64> = (0..dual.node_count())
            .map(|i| 1.0 + eps * (tp * dual.grid().axis(0).node(i)).cos())
            .collect();
        let (rho, _) = DensityField::normalized(&dual, vals).unwrap();
        let vel = diffusion_velocity(&rho, Order::Linear, &ops).unwrap();
        // the map update samples u at the primal nodes, the centers of the
        // dual cells, where the linear-interpolant gradient is O(h^2)
        let mut worst = 0.0f64;
        for i in 0..128 {
            let x = i as f64 / 128.0;
            let got = vel.value(&[x, 0.0, 0.0]).unwrap()[0];
            let expect = eps * tp * (tp * x).sin() / (1.0 + eps * (tp * x).cos());
            worst = worst.max((got - expect).abs());
        }
        assert!(worst < 3e-3, "{worst}");
    }
}
