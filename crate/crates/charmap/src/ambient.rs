//! 3-D ambient velocity fields and the forward/backward characteristic-map
//! pair, advanced with RK4 one-step maps evaluated in jet arithmetic so the
//! packet data of the one-step maps is the exact derivative of the discrete
//! integrator.

use crate::error::Result;
use crate::field::Order;
use crate::grid::{GridSpec, Point, MAX_DIM};
use crate::jet::{delta_of, taylor_compose, Jet, TaylorTable};
use crate::map::{composition_error, Direction, MapField, SubmapChain};

/// Analytic time-dependent velocity with partial derivatives up to total
/// order 3 (what jet propagation through RK4 stages consumes).
pub trait AnalyticVelocity: Sync {
    fn dim(&self) -> usize;

    /// `∂^γ v_k` at `(x, t)`.
    fn partial(&self, k: usize, gamma: &[usize; MAX_DIM], x: &Point, t: f64) -> f64;

    fn value(&self, x: &Point, t: f64) -> Point {
        let mut v = [0.0; MAX_DIM];
        for (k, slot) in v.iter_mut().enumerate().take(self.dim()) {
            *slot = self.partial(k, &[0; MAX_DIM], x, t);
        }
        v
    }
}

/// Built-in ambient velocity fields.
#[derive(Debug, Clone, Copy)]
pub enum AmbientVelocity {
    /// Time-periodic swirl with period `P`; divergence-free, returns to
    /// identity at `t = P`.
    LeVeque { period: f64 },
    StaticZero,
}

/// Per-axis factor shapes of the swirl components.
#[derive(Clone, Copy)]
enum Factor {
    /// `sin²(πs)`
    SinSq,
    /// `sin(2πs)`
    Sin2,
}

fn factor_deriv(f: Factor, order: usize, s: f64) -> f64 {
    use std::f64::consts::PI;
    match f {
        Factor::SinSq => match order {
            0 => (PI * s).sin().powi(2),
            1 => PI * (2.0 * PI * s).sin(),
            2 => 2.0 * PI * PI * (2.0 * PI * s).cos(),
            _ => -4.0 * PI * PI * PI * (2.0 * PI * s).sin(),
        },
        Factor::Sin2 => match order {
            0 => (2.0 * PI * s).sin(),
            1 => 2.0 * PI * (2.0 * PI * s).cos(),
            2 => -4.0 * PI * PI * (2.0 * PI * s).sin(),
            _ => -8.0 * PI * PI * PI * (2.0 * PI * s).cos(),
        },
    }
}

const LEVEQUE_FACTORS: [[Factor; 3]; 3] = [
    [Factor::SinSq, Factor::Sin2, Factor::Sin2],
    [Factor::Sin2, Factor::SinSq, Factor::Sin2],
    [Factor::Sin2, Factor::Sin2, Factor::SinSq],
];
const LEVEQUE_COEF: [f64; 3] = [2.0, -1.0, -1.0];

impl AnalyticVelocity for AmbientVelocity {
    fn dim(&self) -> usize {
        3
    }

    fn partial(&self, k: usize, gamma: &[usize; MAX_DIM], x: &Point, t: f64) -> f64 {
        match self {
            AmbientVelocity::StaticZero => 0.0,
            AmbientVelocity::LeVeque { period } => {
                let ct = (std::f64::consts::PI * t / period).cos();
                let mut v = LEVEQUE_COEF[k] * ct;
                for d in 0..3 {
                    v *= factor_deriv(LEVEQUE_FACTORS[k][d], gamma[d], x[d]);
                }
                v
            }
        }
    }
}

/// Velocity evaluated on jet-valued positions: the Taylor expansion of each
/// component around the jets' base point, truncated by the jet algebra.
fn velocity_jet(
    v: &dyn AnalyticVelocity,
    pos: &[Jet; MAX_DIM],
    t: f64,
) -> [Jet; MAX_DIM] {
    let dim = v.dim();
    let mut base = [0.0; MAX_DIM];
    for d in 0..dim {
        base[d] = pos[d].value();
    }
    let mut deltas = [Jet::zero(dim); MAX_DIM];
    for d in 0..dim {
        deltas[d] = delta_of(&pos[d]);
    }
    let mut out = [Jet::zero(dim); MAX_DIM];
    for k in 0..dim {
        let mut table = TaylorTable::default();
        table.set(&[0; MAX_DIM], v.partial(k, &[0; MAX_DIM], &base, t));
        for g in crate::jet::multi_indices(dim) {
            table.set(g, v.partial(k, g, &base, t));
        }
        out[k] = taylor_compose(&table, &deltas, dim);
    }
    out
}

fn axpy(pos: &[Jet; MAX_DIM], k: &[Jet; MAX_DIM], c: f64, dim: usize) -> [Jet; MAX_DIM] {
    let mut out = *pos;
    for d in 0..dim {
        out[d] = pos[d].add(&k[d].scale(c));
    }
    out
}

/// One RK4 step of `dx/ds = v(x, s)` from `t0` over `dt` (signed), in jet
/// arithmetic. With identity seeds this yields the one-step map's exact
/// packet data; with map jets as seeds it yields the composed update.
pub fn rk4_jet_step(
    v: &dyn AnalyticVelocity,
    t0: f64,
    dt: f64,
    seed: &[Jet; MAX_DIM],
) -> [Jet; MAX_DIM] {
    let dim = v.dim();
    let k1 = velocity_jet(v, seed, t0);
    let k2 = velocity_jet(v, &axpy(seed, &k1, 0.5 * dt, dim), t0 + 0.5 * dt);
    let k3 = velocity_jet(v, &axpy(seed, &k2, 0.5 * dt, dim), t0 + 0.5 * dt);
    let k4 = velocity_jet(v, &axpy(seed, &k3, dt, dim), t0 + dt);
    let mut out = *seed;
    for d in 0..dim {
        let sum = k1[d]
            .add(&k2[d].scale(2.0))
            .add(&k3[d].scale(2.0))
            .add(&k4[d]);
        out[d] = seed[d].add(&sum.scale(dt / 6.0));
    }
    out
}

/// Plain RK4 characteristic integration of a point (no jets), `steps`
/// uniform steps from `t0` to `t1`.
pub fn rk4_flow(v: &dyn AnalyticVelocity, x0: &Point, t0: f64, t1: f64, steps: usize) -> Point {
    let dim = v.dim();
    let dt = (t1 - t0) / steps as f64;
    let mut x = *x0;
    let mut t = t0;
    for _ in 0..steps {
        let k1 = v.value(&x, t);
        let k2 = v.value(&add_scaled(&x, &k1, 0.5 * dt, dim), t + 0.5 * dt);
        let k3 = v.value(&add_scaled(&x, &k2, 0.5 * dt, dim), t + 0.5 * dt);
        let k4 = v.value(&add_scaled(&x, &k3, dt, dim), t + dt);
        for d in 0..dim {
            x[d] += dt / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
        t += dt;
    }
    x
}

/// RK4 characteristic integration carrying jets, `steps` uniform steps.
pub fn rk4_flow_jet(
    v: &dyn AnalyticVelocity,
    seed: &[Jet; MAX_DIM],
    t0: f64,
    t1: f64,
    steps: usize,
) -> [Jet; MAX_DIM] {
    let dt = (t1 - t0) / steps as f64;
    let mut jets = *seed;
    let mut t = t0;
    for _ in 0..steps {
        jets = rk4_jet_step(v, t, dt, &jets);
        t += dt;
    }
    jets
}

fn add_scaled(x: &Point, k: &Point, c: f64, dim: usize) -> Point {
    let mut out = *x;
    for d in 0..dim {
        out[d] += c * k[d];
    }
    out
}

/// One-step displacement map of the velocity over `[t, t+dt]` (`Forward`)
/// or its reversed integration (`Backward`), integrated with `substeps`
/// uniform RK4 stages.
pub struct OneStepMap<'a> {
    pub velocity: &'a dyn AnalyticVelocity,
    pub t: f64,
    pub dt: f64,
    pub direction: Direction,
    pub substeps: usize,
}

impl<'a> OneStepMap<'a> {
    /// Default substep count: keeps the forward/backward round-trip defect
    /// of the discrete integrator near 1e-10 at the reference step sizes.
    pub fn new(velocity: &'a dyn AnalyticVelocity, t: f64, dt: f64, direction: Direction) -> Self {
        Self { velocity, t, dt, direction, substeps: 4 }
    }

    fn endpoints(&self) -> (f64, f64) {
        match self.direction {
            Direction::Forward => (self.t, self.t + self.dt),
            Direction::Backward => (self.t + self.dt, self.t),
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        let (t0, t1) = self.endpoints();
        rk4_flow(self.velocity, x, t0, t1, self.substeps)
    }

    pub fn displacement(&self, x: &Point) -> Point {
        let p = self.apply(x);
        let mut d = [0.0; MAX_DIM];
        for k in 0..self.velocity.dim() {
            d[k] = p[k] - x[k];
        }
        d
    }

    /// Position jets of the one-step map at `x`.
    pub fn position_jets(&self, x: &Point) -> [Jet; MAX_DIM] {
        let (t0, t1) = self.endpoints();
        let dim = self.velocity.dim();
        let mut seed = [Jet::zero(dim); MAX_DIM];
        for d in 0..dim {
            seed[d] = Jet::variable(dim, x[d], d);
        }
        rk4_flow_jet(self.velocity, &seed, t0, t1, self.substeps)
    }

    /// Displacement jets of the one-step map at `x`.
    pub fn displacement_jets(&self, x: &Point) -> [Jet; MAX_DIM] {
        let dim = self.velocity.dim();
        let mut jets = self.position_jets(x);
        for (d, j) in jets.iter_mut().enumerate().take(dim) {
            *j = j.sub(&Jet::variable(dim, x[d], d));
        }
        jets
    }
}

/// Forward and backward map chains advanced in lockstep, with the recorded
/// per-step composition errors.
#[derive(Debug, Clone)]
pub struct AmbientMaps {
    pub forward: SubmapChain,
    pub backward: SubmapChain,
    pub grid: GridSpec,
    pub error_trace: Vec<(f64, f64)>,
}

impl AmbientMaps {
    pub fn remap_count(&self) -> usize {
        // final archive at t_final is bookkeeping, not an error-triggered remap
        self.forward.len().saturating_sub(1)
    }
}

/// Evolve the forward/backward pair over `[0, t_final]` on a periodic cubic
/// grid. Both chains are archived and reset to identity at a common time
/// whenever the forward/backward composition defect of the working submaps
/// exceeds `delta_remap`.
pub fn evolve_pair(
    v: &dyn AnalyticVelocity,
    t_final: f64,
    dt: f64,
    grid: &GridSpec,
    delta_remap: f64,
) -> Result<AmbientMaps> {
    assert!(t_final > 0.0 && dt > 0.0);
    let dim = grid.dim();
    let samples = crate::halton::sample_set(dim, crate::halton::RESIDUAL_SAMPLES);

    let mut fwd = MapField::identity(grid, Order::Cubic);
    let mut bwd = MapField::identity(grid, Order::Cubic);
    let mut chain_f = SubmapChain::new(Direction::Forward, 0.0);
    let mut chain_b = SubmapChain::new(Direction::Backward, 0.0);
    let mut error_trace = Vec::new();

    let mut t = 0.0;
    while t < t_final - 1e-12 {
        let step = dt.min(t_final - t);
        // forward: H[ onestep_fwd ∘ Φ_[0,t] ]
        let fwd_new = MapField::from_position_jets(grid, |_lin, x| {
            let seed = fwd.position_jets(x)?;
            Ok(rk4_jet_step(v, t, step, &seed))
        })?;
        // backward: H[ Φ_[t,0] ∘ onestep_bwd ]. A single RK4 stage per map
        // update is enough here: the integrator asymmetry is O(dt^5) per
        // step, orders below the interpolation error the remap criterion
        // tracks.
        let one_bwd =
            OneStepMap { velocity: v, t, dt: step, direction: Direction::Backward, substeps: 1 };
        let inner_jets: Vec<[Jet; MAX_DIM]> = {
            use rayon::prelude::*;
            (0..grid.node_count())
                .into_par_iter()
                .map(|lin| {
                    let x = grid.node_pos_lin(lin);
                    one_bwd.displacement_jets(&x)
                })
                .collect()
        };
        let bwd_new = bwd.compose_with_inner_disp_jets(grid, &inner_jets)?;
        fwd = fwd_new;
        bwd = bwd_new;
        t += step;

        let eps = composition_error(&fwd, &bwd, &samples)?;
        error_trace.push((t, eps));
        if eps > delta_remap && t < t_final - 1e-12 {
            chain_f.push(std::mem::replace(&mut fwd, MapField::identity(grid, Order::Cubic)), t);
            chain_b.push(std::mem::replace(&mut bwd, MapField::identity(grid, Order::Cubic)), t);
        }
    }
    chain_f.push(fwd, t_final);
    chain_b.push(bwd, t_final);
    Ok(AmbientMaps {
        forward: chain_f,
        backward: chain_b,
        grid: grid.clone(),
        error_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leveque_values_at_reference_points() {
        let v = AmbientVelocity::LeVeque { period: 3.0 };
        let at = v.value(&[0.25, 0.25, 0.25], 0.0);
        assert!((at[0] - 1.0).abs() < 1e-14);
        assert!((at[1] + 0.5).abs() < 1e-14);
        assert!((at[2] + 0.5).abs() < 1e-14);
        // cos(pi/2) = 0 at half period
        let mid = v.value(&[0.123, 0.7, 0.9], 1.5);
        for d in 0..3 {
            assert!(mid[d].abs() < 1e-14);
        }
    }

    #[test]
    fn leveque_is_divergence_free() {
        let v = AmbientVelocity::LeVeque { period: 3.0 };
        let h = 1e-5;
        let pts = crate::halton::sample_set(3, 100);
        for p in &pts {
            let mut div = 0.0;
            for d in 0..3 {
                let mut hi = *p;
                let mut lo = *p;
                hi[d] += h;
                lo[d] -= h;
                div += (v.value(&hi, 0.4)[d] - v.value(&lo, 0.4)[d]) / (2.0 * h);
            }
            assert!(div.abs() < 1e-6, "{div}");
        }
    }

    #[test]
    fn leveque_partials_match_finite_differences() {
        let v = AmbientVelocity::LeVeque { period: 3.0 };
        let x = [0.31, 0.62, 0.17];
        let t = 0.7;
        let h = 1e-5;
        for k in 0..3 {
            for d in 0..3 {
                let mut g = [0usize; MAX_DIM];
                g[d] = 1;
                let mut hi = x;
                let mut lo = x;
                hi[d] += h;
                lo[d] -= h;
                let fd = (v.partial(k, &[0; 3], &hi, t) - v.partial(k, &[0; 3], &lo, t)) / (2.0 * h);
                assert!((v.partial(k, &g, &x, t) - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn one_step_forward_backward_are_mutual_inverses() {
        let v = AmbientVelocity::LeVeque { period: 3.0 };
        let dt = 1.0 / 96.0;
        let fwd = OneStepMap::new(&v, 0.4, dt, Direction::Forward);
        let bwd = OneStepMap::new(&v, 0.4, dt, Direction::Backward);
        let pts = crate::halton::sample_set(3, 100);
        let mut worst = 0.0f64;
        for p in &pts {
            let q = bwd.apply(&fwd.apply(p));
            for d in 0..3 {
                worst = worst.max((q[d] - p[d]).abs());
            }
        }
        assert!(worst < 1e-10, "{worst}");
    }

    #[test]
    fn one_step_matches_refined_rk4() {
        let v = AmbientVelocity::LeVeque { period: 3.0 };
        let dt = 1.0 / 96.0;
        let one = OneStepMap::new(&v, 0.25, dt, Direction::Forward);
        let pts = crate::halton::sample_set(3, 50);
        let mut worst = 0.0f64;
        for p in &pts {
            let coarse = one.apply(p);
            let fine = rk4_flow(&v, p, 0.25, 0.25 + dt, 64);
            for d in 0..3 {
                worst = worst.max((coarse[d] - fine[d]).abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn zero_velocity_pair_stays_identity() {
        let v = AmbientVelocity::StaticZero;
        let g = GridSpec::periodic(3, 8).unwrap();
        let maps = evolve_pair(&v, 0.1, 0.05, &g, 1e-3).unwrap();
        assert_eq!(maps.forward.len(), 1);
        assert!(maps.forward.maps()[0].is_identity());
        assert!(maps.backward.maps()[0].is_identity());
        for (_, e) in &maps.error_trace {
            assert_eq!(*e, 0.0);
        }
    }

    #[test]
    fn jet_jacobian_matches_finite_difference() {
        let v = AmbientVelocity::LeVeque { period: 3.0 };
        let dt = 1.0 / 48.0;
        let one = OneStepMap::new(&v, 0.3, dt, Direction::Forward);
        let x = [0.21, 0.43, 0.67];
        let jets = one.position_jets(&x);
        let h = 1e-6;
        for d in 0..3 {
            let mut hi = x;
            let mut lo = x;
            hi[d] += h;
            lo[d] -= h;
            let ph = one.apply(&hi);
            let pl = one.apply(&lo);
            for k in 0..3 {
                let fd = (ph[k] - pl[k]) / (2.0 * h);
                assert!(
                    (jets[k].deriv(d) - fd).abs() < 1e-7,
                    "comp {k} axis {d}: jet {} fd {}",
                    jets[k].deriv(d),
                    fd
                );
            }
        }
    }
}
