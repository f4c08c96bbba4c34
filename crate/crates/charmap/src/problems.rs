//! Benchmark densities used by the experiments and tests.

use crate::density::DensityFn;
use crate::grid::Point;
use crate::heatflow::MovingDensity;

/// Smooth bump `exp(-(1-(2s/w)^2)^{-1})` supported on `|s| < w/2`.
pub fn bump(s: f64, w: f64) -> f64 {
    let q = 2.0 * s / w;
    let r = 1.0 - q * q;
    if r <= 0.0 {
        0.0
    } else {
        (-1.0 / r).exp()
    }
}

/// `∫_{-w/2}^{w/2} bump(s, w) ds` by Simpson quadrature; the integrand is
/// smooth and compactly supported so a fixed fine rule is exact to roundoff.
fn bump_integral(w: f64) -> f64 {
    let n = 4096;
    let a = -0.5 * w;
    let h = w / n as f64;
    let mut acc = bump(a, w) + bump(a + w, w);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += bump(x, w) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Density concentrated in a band of width `w` around a circle of radius `r`
/// on the flat 2-torus: `ρ0 = 1 + amplitude·η` with `η` the mean-free,
/// min-normalized ring bump. With amplitude 0.25 the minimum density is 0.75
/// and the mass is exactly one.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusDensity {
    pub center: [f64; 2],
    pub radius: f64,
    pub width: f64,
    pub amplitude: f64,
    mean: f64,
    sup: f64,
}

impl AnnulusDensity {
    pub fn new(center: [f64; 2], radius: f64, width: f64, amplitude: f64) -> Self {
        // ring bump average over the unit square; the ring lies strictly
        // inside, so polar integration is exact:
        //   ∫ bump(|x-c|-r) dx = 2π r ∫ bump(s) ds  (odd part cancels)
        let mean = 2.0 * std::f64::consts::PI * radius * bump_integral(width);
        Self {
            center,
            radius,
            width,
            amplitude,
            mean,
            sup: (-1.0f64).exp(),
        }
    }

    /// Standard parameters: band width 0.15 around radius 0.25, centered,
    /// minimum density 0.75.
    pub fn standard() -> Self {
        Self::new([0.5, 0.5], 0.25, 0.15, 0.25)
    }

    /// The mean-free variation η, normalized so `min η = -1`.
    pub fn eta(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let s = (dx * dx + dy * dy).sqrt() - self.radius;
        (bump(s, self.width) - self.mean) / self.mean
    }

    /// η rescaled to `sup |η̂| = 1` (used by the moving-density problem so
    /// that modulated amplitudes keep the density strictly positive).
    pub fn eta_unit_sup(&self, x: f64, y: f64) -> f64 {
        let emax = (self.sup - self.mean) / self.mean;
        self.eta(x, y) / emax
    }
}

impl DensityFn for AnnulusDensity {
    fn density(&self, x: &Point) -> f64 {
        1.0 + self.amplitude * self.eta(x[0], x[1])
    }
}

/// Advected, amplitude-modulated annulus on the 2-torus:
/// `ρ0(x, y, t) = 1 + a·sin(1.5πt)·η̂(x + 0.25 sin(0.5πt) sin(2πy), y)`.
///
/// η̂ is normalized to unit sup so the density stays in `[1-a, 1+a]`.
#[derive(Debug, Clone, Copy)]
pub struct MovingAnnulusDensity {
    pub base: AnnulusDensity,
    pub amplitude: f64,
}

impl MovingAnnulusDensity {
    pub fn standard() -> Self {
        Self { base: AnnulusDensity::standard(), amplitude: 0.25 }
    }
}

impl MovingDensity for MovingAnnulusDensity {
    fn density_at(&self, x: &Point, t: f64) -> f64 {
        let shift = 0.25 * (0.5 * std::f64::consts::PI * t).sin()
            * (2.0 * std::f64::consts::PI * x[1]).sin();
        let a = self.amplitude * (1.5 * std::f64::consts::PI * t).sin();
        1.0 + a * self.base.eta_unit_sup(x[0] + shift, x[1])
    }
}

/// Strictly positive two-bump density on the Neumann interval `[0,1]`,
/// used by the 1-D monotone-transport oracle.
#[derive(Debug, Clone, Copy)]
pub struct TwoBumpDensity;

impl TwoBumpDensity {
    pub fn raw(x: f64) -> f64 {
        let g1 = (-((x - 0.3) / 0.08).powi(2)).exp();
        let g2 = 0.7 * (-((x - 0.72) / 0.1).powi(2)).exp();
        0.25 + g1 + g2
    }
}

impl DensityFn for TwoBumpDensity {
    fn density(&self, x: &Point) -> f64 {
        Self::raw(x[0])
    }
}
