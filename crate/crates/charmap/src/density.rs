//! Probability densities sampled on cell-centered (dual) grids.

use crate::error::{CmError, Result};
use crate::grid::{DualGrid, Point};
use crate::map::{det_dim, JacobianMap};
use rayon::prelude::*;

/// Strictly positive density samples at dual nodes with unit midpoint mass.
#[derive(Debug, Clone)]
pub struct DensityField {
    dual: DualGrid,
    values: Vec<f64>,
}

/// A positive scalar field on the domain.
pub trait DensityFn: Sync {
    fn density(&self, x: &Point) -> f64;
}

impl<F> DensityFn for F
where
    F: Fn(&Point) -> f64 + Sync,
{
    fn density(&self, x: &Point) -> f64 {
        self(x)
    }
}

impl DensityField {
    /// Validate positivity and renormalize to unit midpoint-quadrature mass.
    /// Returns the field and the mass the raw samples carried.
    pub fn normalized(dual: &DualGrid, mut values: Vec<f64>) -> Result<(Self, f64)> {
        if values.len() != dual.node_count() {
            return Err(CmError::Format(format!(
                "density has {} samples for {} dual nodes",
                values.len(),
                dual.node_count()
            )));
        }
        let mut min = f64::INFINITY;
        for &v in &values {
            if !v.is_finite() || v <= 0.0 {
                return Err(CmError::NonPositiveDensity { value: v });
            }
            min = min.min(v);
        }
        let mass: f64 = values.iter().sum::<f64>() * dual.cell_volume();
        let inv = 1.0 / mass;
        for v in values.iter_mut() {
            *v *= inv;
        }
        Ok((Self { dual: dual.clone(), values }, mass))
    }

    pub fn dual(&self) -> &DualGrid {
        &self.dual
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Midpoint-quadrature mass (unity after normalization).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dual.cell_volume()
    }
}

/// Midpoint-quadrature value of `½ ∫ (ρ - 1)² dx`.
pub fn l2_energy(rho: &DensityField) -> f64 {
    let cv = rho.dual.cell_volume();
    0.5 * cv
        * rho
            .values
            .iter()
            .map(|&v| (v - 1.0) * (v - 1.0))
            .sum::<f64>()
}

/// Transported density at the dual nodes:
/// `ρ(x) = ρ0(map(x)) · det ∇map(x)`, renormalized to unit mass.
///
/// Returns the density and its pre-normalization mass. Errors if the map is
/// singular (`det ≤ 0`) or the base density nonpositive at any sample.
pub fn pullback_density(
    rho0: &dyn DensityFn,
    map: &dyn JacobianMap,
    dual: &DualGrid,
) -> Result<(DensityField, f64)> {
    let g = dual.grid();
    let dim = g.dim();
    let values: Vec<f64> = (0..g.node_count())
        .into_par_iter()
        .map(|lin| {
            let x = g.node_pos_lin(lin);
            let (y, jac) = map.apply_with_jacobian(&x)?;
            let det = det_dim(&jac, dim);
            if det <= 0.0 {
                return Err(CmError::SingularMap { det });
            }
            let base = rho0.density(&y);
            if !(base > 0.0) || !base.is_finite() {
                return Err(CmError::NonPositiveDensity { value: base });
            }
            Ok(base * det)
        })
        .collect::<Result<Vec<_>>>()?;
    DensityField::normalized(dual, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Order;
    use crate::grid::GridSpec;
    use crate::map::MapField;

    #[test]
    fn identity_pullback_reproduces_density() {
        let g = GridSpec::periodic(1, 64).unwrap();
        let dual = g.dual().unwrap();
        let id = MapField::identity(&g, Order::Cubic);
        let tp = 2.0 * std::f64::consts::PI;
        let rho0 = move |x: &Point| 1.0 + 0.3 * (tp * x[0]).cos();
        let (rho, mass) = pullback_density(&rho0, &id, &dual).unwrap();
        assert!((mass - 1.0).abs() < 1e-12); // cosine integrates away exactly at midpoints
        for (i, v) in rho.values().iter().enumerate() {
            let x = dual.grid().axis(0).node(i);
            assert!((v - (1.0 + 0.3 * (tp * x).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_of_cosine_density() {
        let g = GridSpec::periodic(1, 128).unwrap();
        let dual = g.dual().unwrap();
        let tp = 2.0 * std::f64::consts::PI;
        let values: Vec<f64> = (0..dual.node_count())
            .map(|i| 1.0 + 0.2 * (tp * dual.grid().axis(0).node(i)).cos())
            .collect();
        let (rho, _) = DensityField::normalized(&dual, values).unwrap();
        // E = eps^2 / 4 exactly for a resolved cosine under midpoint quadrature
        assert!((l2_energy(&rho) - 0.01).abs() < 1e-14);
    }

    #[test]
    fn uniform_density_has_zero_energy() {
        let g = GridSpec::neumann(2, 9).unwrap();
        let dual = g.dual().unwrap();
        let (rho, _) = DensityField::normalized(&dual, vec![2.0; dual.node_count()]).unwrap();
        // renormalization brings the constant to one
        assert!(l2_energy(&rho) < 1e-28);
        assert!((rho.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_samples_rejected() {
        let g = GridSpec::periodic(1, 8).unwrap();
        let dual = g.dual().unwrap();
        let mut vals = vec![1.0; dual.node_count()];
        vals[3] = 0.0;
        assert!(DensityField::normalized(&dual, vals).is_err());
    }
}
