//! Truncated multivariate jets: value plus all mixed first partials
//! `∂^α, α ∈ {0,1}^dim`, one slot per axis subset.
//!
//! These are elements of `R[ε_0..ε_{d-1}] / (ε_i^2)`. Propagating them
//! through a map evaluates the full chain rule for exactly the derivative
//! packet a Hermite node stores, so semi-Lagrangian updates and map
//! compositions share one mechanism.

use crate::field::DerivTensor;
use crate::grid::MAX_DIM;

/// Jet with one slot per subset of axes; slot index is the subset bitmask
/// (bit `d` set means the slot carries one derivative along axis `d`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub dim: usize,
    pub s: [f64; 8],
}

impl Jet {
    pub fn zero(dim: usize) -> Self {
        Jet { dim, s: [0.0; 8] }
    }

    pub fn constant(dim: usize, v: f64) -> Self {
        let mut j = Jet::zero(dim);
        j.s[0] = v;
        j
    }

    /// Seed for the coordinate `x_d`: value plus unit derivative on axis `d`.
    pub fn variable(dim: usize, v: f64, d: usize) -> Self {
        let mut j = Jet::zero(dim);
        j.s[0] = v;
        j.s[1 << d] = 1.0;
        j
    }

    pub fn value(&self) -> f64 {
        self.s[0]
    }

    /// First derivative along axis `d`.
    pub fn deriv(&self, d: usize) -> f64 {
        self.s[1 << d]
    }

    pub fn nslots(&self) -> usize {
        1 << self.dim
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut out = *self;
        for i in 0..self.nslots() {
            out.s[i] += o.s[i];
        }
        out
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        let mut out = *self;
        for i in 0..self.nslots() {
            out.s[i] -= o.s[i];
        }
        out
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = *self;
        for i in 0..self.nslots() {
            out.s[i] *= c;
        }
        out
    }

    /// Truncated product: slots combine only over disjoint subsets.
    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.nslots();
        let mut out = Jet::zero(self.dim);
        for a in 0..n {
            let va = self.s[a];
            if va == 0.0 {
                continue;
            }
            // subsets disjoint from a
            let free = (n - 1) & !a;
            let mut b = free;
            loop {
                out.s[a | b] += va * o.s[b];
                if b == 0 {
                    break;
                }
                b = (b - 1) & free;
            }
        }
        out
    }
}

/// Taylor coefficients `∂^γ f` of a scalar function at a base point, for
/// multi-indices with entries up to 3 and total order up to `MAX_DIM`.
/// Slots outside the function's supported range stay at zero, which drops
/// the corresponding chain-rule terms.
#[derive(Debug, Clone, Copy)]
pub struct TaylorTable {
    c: [[[f64; 4]; 4]; 4],
}

impl Default for TaylorTable {
    fn default() -> Self {
        TaylorTable { c: [[[0.0; 4]; 4]; 4] }
    }
}

impl TaylorTable {
    pub fn set(&mut self, gamma: &[usize; MAX_DIM], v: f64) {
        self.c[gamma[0]][gamma[1]][gamma[2]] = v;
    }

    pub fn get(&self, gamma: &[usize; MAX_DIM]) -> f64 {
        self.c[gamma[0]][gamma[1]][gamma[2]]
    }

    /// Table from an interpolant's derivative block: entries above
    /// `max_entry` are unavailable and left at zero.
    pub fn from_derivs(d: &DerivTensor, dim: usize, max_entry: usize) -> Self {
        let mut t = TaylorTable::default();
        for g in multi_indices(dim) {
            if g.iter().all(|&e| e <= max_entry) {
                t.set(g, d.d[g[0]][g[1]][g[2]]);
            }
        }
        t
    }
}

/// Multi-indices `γ` with `|γ| ≤ dim` (the jet truncation order), entries up
/// to `dim`, excluding `γ = 0`, in graded order.
pub fn multi_indices(dim: usize) -> &'static [[usize; MAX_DIM]] {
    const D1: &[[usize; MAX_DIM]] = &[[1, 0, 0]];
    const D2: &[[usize; MAX_DIM]] = &[
        [1, 0, 0],
        [0, 1, 0],
        [2, 0, 0],
        [1, 1, 0],
        [0, 2, 0],
    ];
    const D3: &[[usize; MAX_DIM]] = &[
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [2, 0, 0],
        [0, 2, 0],
        [0, 0, 2],
        [1, 1, 0],
        [1, 0, 1],
        [0, 1, 1],
        [3, 0, 0],
        [0, 3, 0],
        [0, 0, 3],
        [2, 1, 0],
        [2, 0, 1],
        [1, 2, 0],
        [0, 2, 1],
        [1, 0, 2],
        [0, 1, 2],
        [1, 1, 1],
    ];
    match dim {
        1 => D1,
        2 => D2,
        _ => D3,
    }
}

const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];

/// Evaluate `f` on jet-valued arguments by its truncated Taylor expansion:
/// the deltas are the argument jets with their value slot removed.
///
/// Returns the jet of `f ∘ g` when the deltas come from the jets of `g`.
pub fn taylor_compose(table: &TaylorTable, deltas: &[Jet; MAX_DIM], dim: usize) -> Jet {
    // powers of each delta up to dim
    let one = Jet::constant(dim, 1.0);
    let mut pow = [[one; 4]; MAX_DIM];
    for d in 0..dim {
        pow[d][1] = deltas[d];
        for k in 2..=dim {
            pow[d][k] = pow[d][k - 1].mul(&deltas[d]);
        }
    }
    let mut out = Jet::constant(dim, table.get(&[0, 0, 0]));
    for g in multi_indices(dim) {
        let c = table.get(g);
        if c == 0.0 {
            continue;
        }
        let mut term = pow[0][g[0]];
        if dim > 1 && g[1] > 0 {
            term = term.mul(&pow[1][g[1]]);
        }
        if dim > 2 && g[2] > 0 {
            term = term.mul(&pow[2][g[2]]);
        }
        let w = c / (FACT[g[0]] * FACT[g[1]] * FACT[g[2]]);
        out = out.add(&term.scale(w));
    }
    out
}

/// Remove the value slot, leaving the delta used by `taylor_compose`.
pub fn delta_of(j: &Jet) -> Jet {
    let mut d = *j;
    d.s[0] = 0.0;
    d
}

/// Convert a packet-slot index (lexicographic over `α`, first axis most
/// significant) to a jet slot bitmask (bit per axis).
pub fn packet_slot_to_mask(slot: usize, dim: usize) -> usize {
    let mut mask = 0usize;
    for d in 0..dim {
        if (slot >> (dim - 1 - d)) & 1 == 1 {
            mask |= 1 << d;
        }
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_in_two_dims() {
        // f = x*y has jet slots: value, y, x, 1
        let x = Jet::variable(2, 0.3, 0);
        let y = Jet::variable(2, 0.7, 1);
        let p = x.mul(&y);
        assert!((p.value() - 0.21).abs() < 1e-15);
        assert!((p.deriv(0) - 0.7).abs() < 1e-15);
        assert!((p.deriv(1) - 0.3).abs() < 1e-15);
        assert!((p.s[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compose_matches_analytic_mixed_derivative() {
        // f(u,v) = u^2 v, g = (x + y^2, x y); compare d^2/dxdy of f(g) at a point
        let (x0, y0) = (0.4, 0.8);
        let u = {
            let x = Jet::variable(2, x0, 0);
            let y = Jet::variable(2, y0, 1);
            x.add(&y.mul(&y))
        };
        let v = {
            let x = Jet::variable(2, x0, 0);
            let y = Jet::variable(2, y0, 1);
            x.mul(&y)
        };
        let (ub, vb) = (u.value(), v.value());
        let mut table = TaylorTable::default();
        table.set(&[0, 0, 0], ub * ub * vb);
        table.set(&[1, 0, 0], 2.0 * ub * vb);
        table.set(&[0, 1, 0], ub * ub);
        table.set(&[2, 0, 0], 2.0 * vb);
        table.set(&[1, 1, 0], 2.0 * ub);
        let comp = taylor_compose(&table, &[delta_of(&u), delta_of(&v), Jet::zero(2)], 2);

        // finite-difference oracle for d2/dxdy f(g)
        let f = |x: f64, y: f64| {
            let u = x + y * y;
            let v = x * y;
            u * u * v
        };
        let e = 1e-5;
        let fd = (f(x0 + e, y0 + e) - f(x0 + e, y0 - e) - f(x0 - e, y0 + e) + f(x0 - e, y0 - e))
            / (4.0 * e * e);
        assert!(
            (comp.s[3] - fd).abs() < 1e-5,
            "jet {} vs fd {}",
            comp.s[3],
            fd
        );
    }

    #[test]
    fn identity_composition_is_exact() {
        let mut table = TaylorTable::default();
        table.set(&[0, 0, 0], 2.5);
        table.set(&[1, 0, 0], -1.25);
        table.set(&[0, 1, 0], 0.5);
        table.set(&[1, 1, 0], 3.0);
        table.set(&[2, 0, 0], 7.0); // pure seconds must not leak into packet slots
        let dx = delta_of(&Jet::variable(2, 0.2, 0));
        let dy = delta_of(&Jet::variable(2, 0.9, 1));
        let j = taylor_compose(&table, &[dx, dy, Jet::zero(2)], 2);
        assert_eq!(j.value(), 2.5);
        assert_eq!(j.deriv(0), -1.25);
        assert_eq!(j.deriv(1), 0.5);
        assert_eq!(j.s[3], 3.0);
    }

    #[test]
    fn packet_mask_conversion() {
        // dim 3, packet slot order: (a0 a1 a2) lexicographic, a0 most significant
        assert_eq!(packet_slot_to_mask(0b100, 3), 0b001);
        assert_eq!(packet_slot_to_mask(0b001, 3), 0b100);
        assert_eq!(packet_slot_to_mask(0b110, 3), 0b011);
        assert_eq!(packet_slot_to_mask(0b1, 1), 0b1);
    }
}
