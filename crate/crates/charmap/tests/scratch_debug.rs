use charmap::density::DensityField;
use charmap::field::Order;
use charmap::grid::{GridSpec, Point};
use charmap::heatflow::{diffusion_velocity, implicit_heat};
use charmap::map::{MapField, Velocity};
use charmap::spectral::SpectralOps;

#[test]
fn debug_1d_cosine_flow() {
    let order = match std::env::var("DBG_ORDER").as_deref() {
        Ok("linear") => Order::Linear,
        _ => Order::Cubic,
    };
    let dt_scale: f64 = std::env::var("DBG_DT")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(1.0);
    let g = GridSpec::periodic(1, 64).unwrap();
    let dual = g.dual().unwrap();
    let ops = SpectralOps::new();
    let tp = 2.0 * std::f64::consts::PI;
    let rho0 = move |x: &Point| 1.0 + 0.4 * (tp * x[0]).cos();
    let dt = dt_scale * 0.1 / 64.0;
    let mut map = MapField::identity(&g, order);
    let steps = (40.0 / dt_scale) as usize;
    for step in 0..steps {
        let vals: Vec<f64> = (0..dual.node_count())
            .map(|i| {
                let x = [dual.grid().axis(0).node(i), 0.0, 0.0];
                let (y, j) = map.apply_with_jacobian(&x).unwrap();
                rho0(&y) * j[0][0]
            })
            .collect();
        let (rho, _) = DensityField::normalized(&dual, vals).unwrap();
        let sm = implicit_heat(&rho, dt, &ops).unwrap();
        let vel = diffusion_velocity(&sm, order, &ops).unwrap();
        let subst = ((vel.max_abs() * dt / (0.5 / 64.0)).ceil() as usize).max(1);
        let out = map.advance(&vel, dt, subst).unwrap();
        map = out.map;
        let mut detmin = f64::INFINITY;
        let mut detmax = f64::NEG_INFINITY;
        for i in 0..256 {
            let x = [i as f64 / 256.0, 0.0, 0.0];
            let d = map.jacobian_det(&x).unwrap();
            detmin = detmin.min(d);
            detmax = detmax.max(d);
        }
        let u0 = vel.value(&[0.25, 0.0, 0.0]).unwrap()[0];
        println!(
            "step {step}: substeps {subst} maxu {:.3} u(0.25) {:+.4} det in [{:.4},{:.4}]",
            vel.max_abs(),
            u0,
            detmin,
            detmax
        );
        if detmin < 0.0 {
            panic!("fold at step {step}");
        }
    }
}
