//! Transform-based kernels on cell-centered grids: the screened Poisson
//! solve behind implicit Euler heat steps, and spectral differentiation for
//! velocity derivative packets.
//!
//! Periodic axes use the DFT, Neumann axes the type-II cosine transform;
//! both diagonalize the 3-point second-difference stencil with wraparound /
//! mirrored ghosts exactly, so one transform round trip equals the direct
//! linear solve.

use crate::grid::{Boundary, GridSpec};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::{Arc, Mutex};

pub struct SpectralOps {
    planner: Mutex<FftPlanner<f64>>,
}

impl Default for SpectralOps {
    fn default() -> Self {
        Self::new()
    }
}

impl SpectralOps {
    pub fn new() -> Self {
        Self { planner: Mutex::new(FftPlanner::new()) }
    }

    fn plan(&self, n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
        let mut p = self.planner.lock().unwrap();
        match dir {
            FftDirection::Forward => p.plan_fft_forward(n),
            FftDirection::Inverse => p.plan_fft_inverse(n),
        }
    }

    /// Apply `(I - dt·Δ_h)^{-1}` to cell-centered data, where `Δ_h` is the
    /// per-axis 3-point stencil (wraparound on periodic axes, mirrored ghost
    /// cells on Neumann axes). Exact in the transform basis; the zero mode
    /// is untouched, so mass is preserved to machine precision.
    pub fn screened_poisson(&self, grid: &GridSpec, data: &[f64], dt: f64) -> Vec<f64> {
        let dim = grid.dim();
        let n_total = grid.node_count();
        assert_eq!(data.len(), n_total);
        let mut re: Vec<f64> = data.to_vec();
        let mut im: Vec<f64> = vec![0.0; n_total];

        // eigenvalues of the stencil per axis
        let eigs: Vec<Vec<f64>> = (0..dim)
            .map(|d| {
                let ax = grid.axis(d);
                let m = ax.n;
                let h2 = ax.h * ax.h;
                (0..m)
                    .map(|k| match ax.bc {
                        Boundary::Periodic => {
                            (2.0 * (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos() - 2.0)
                                / h2
                        }
                        Boundary::Neumann => {
                            (2.0 * (std::f64::consts::PI * k as f64 / m as f64).cos() - 2.0) / h2
                        }
                    })
                    .collect()
            })
            .collect();

        for d in 0..dim {
            self.axis_forward(grid, d, &mut re, &mut im);
        }
        // divide by (1 + dt * sum of eigenvalues)
        for lin in 0..n_total {
            let idx = grid.unindex(lin);
            let mut lam = 0.0;
            for (d, e) in eigs.iter().enumerate() {
                lam += e[idx[d]];
            }
            let s = 1.0 / (1.0 - dt * lam);
            re[lin] *= s;
            im[lin] *= s;
        }
        for d in 0..dim {
            self.axis_inverse(grid, d, &mut re, &mut im);
        }
        re
    }

    /// Nodal values of `∂_axis f` from the data's trigonometric series
    /// (Fourier on periodic axes, cosine-to-sine on Neumann axes).
    pub fn axis_derivative(&self, grid: &GridSpec, data: &[f64], axis: usize) -> Vec<f64> {
        let ax = grid.axis(axis);
        let m = ax.n;
        let mut out = data.to_vec();
        match ax.bc {
            Boundary::Periodic => {
                let fwd = self.plan(m, FftDirection::Forward);
                let inv = self.plan(m, FftDirection::Inverse);
                let mut line = vec![Complex::new(0.0, 0.0); m];
                for_each_line(grid, axis, |stride, base| {
                    for (j, c) in line.iter_mut().enumerate() {
                        *c = Complex::new(out[base + j * stride], 0.0);
                    }
                    fwd.process(&mut line);
                    for (k, c) in line.iter_mut().enumerate() {
                        let kk = signed_freq(k, m);
                        // Nyquist derivative is zeroed for real data
                        let w = if 2 * k == m {
                            0.0
                        } else {
                            2.0 * std::f64::consts::PI * kk
                        };
                        *c = Complex::new(-c.im * w, c.re * w);
                    }
                    inv.process(&mut line);
                    for j in 0..m {
                        out[base + j * stride] = line[j].re / m as f64;
                    }
                });
            }
            Boundary::Neumann => {
                let inv2m = self.plan(2 * m, FftDirection::Inverse);
                let fwd = self.plan(m, FftDirection::Forward);
                let mut xline = vec![0.0; m];
                let mut big = vec![Complex::new(0.0, 0.0); 2 * m];
                for_each_line(grid, axis, |stride, base| {
                    for (j, x) in xline.iter_mut().enumerate() {
                        *x = out[base + j * stride];
                    }
                    let a = dct2(&fwd, &xline);
                    // f = (1/m)(a_0 + 2 sum a_k cos(pi k x)); f' at centers via
                    // s_n = sum_k b_k sin(pi k (2n+1)/(2m)), b_k = -2 a_k pi k / m
                    for c in big.iter_mut() {
                        *c = Complex::new(0.0, 0.0);
                    }
                    for k in 1..m {
                        let b = -2.0 * a[k] * std::f64::consts::PI * k as f64 / m as f64;
                        let th = std::f64::consts::PI * k as f64 / (2.0 * m as f64);
                        big[k] = Complex::new(b * th.cos(), b * th.sin());
                    }
                    inv2m.process(&mut big);
                    for j in 0..m {
                        out[base + j * stride] = big[j].im;
                    }
                });
            }
        }
        out
    }

    fn axis_forward(&self, grid: &GridSpec, axis: usize, re: &mut [f64], im: &mut [f64]) {
        let ax = grid.axis(axis);
        let m = ax.n;
        match ax.bc {
            Boundary::Periodic => {
                let fwd = self.plan(m, FftDirection::Forward);
                let mut line = vec![Complex::new(0.0, 0.0); m];
                for_each_line(grid, axis, |stride, base| {
                    for (j, c) in line.iter_mut().enumerate() {
                        *c = Complex::new(re[base + j * stride], im[base + j * stride]);
                    }
                    fwd.process(&mut line);
                    for (j, c) in line.iter().enumerate() {
                        re[base + j * stride] = c.re;
                        im[base + j * stride] = c.im;
                    }
                });
            }
            Boundary::Neumann => {
                let fwd = self.plan(m, FftDirection::Forward);
                let mut xline = vec![0.0; m];
                for_each_line(grid, axis, |stride, base| {
                    for part in 0..2 {
                        let buf: &mut [f64] = if part == 0 { &mut *re } else { &mut *im };
                        for (j, x) in xline.iter_mut().enumerate() {
                            *x = buf[base + j * stride];
                        }
                        let a = dct2(&fwd, &xline);
                        for j in 0..m {
                            buf[base + j * stride] = a[j];
                        }
                    }
                });
            }
        }
    }

    fn axis_inverse(&self, grid: &GridSpec, axis: usize, re: &mut [f64], im: &mut [f64]) {
        let ax = grid.axis(axis);
        let m = ax.n;
        match ax.bc {
            Boundary::Periodic => {
                let inv = self.plan(m, FftDirection::Inverse);
                let mut line = vec![Complex::new(0.0, 0.0); m];
                for_each_line(grid, axis, |stride, base| {
                    for (j, c) in line.iter_mut().enumerate() {
                        *c = Complex::new(re[base + j * stride], im[base + j * stride]);
                    }
                    inv.process(&mut line);
                    for (j, c) in line.iter().enumerate() {
                        re[base + j * stride] = c.re / m as f64;
                        im[base + j * stride] = c.im / m as f64;
                    }
                });
            }
            Boundary::Neumann => {
                let inv = self.plan(m, FftDirection::Inverse);
                let mut aline = vec![0.0; m];
                for_each_line(grid, axis, |stride, base| {
                    for part in 0..2 {
                        let buf: &mut [f64] = if part == 0 { &mut *re } else { &mut *im };
                        for (j, a) in aline.iter_mut().enumerate() {
                            *a = buf[base + j * stride];
                        }
                        let x = dct3(&inv, &aline);
                        for j in 0..m {
                            buf[base + j * stride] = x[j];
                        }
                    }
                });
            }
        }
    }
}

fn signed_freq(k: usize, n: usize) -> f64 {
    if 2 * k <= n {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Visit every 1-D line along `axis`: calls `f(stride, base)` where the
/// line's elements live at `base + j*stride`.
fn for_each_line(grid: &GridSpec, axis: usize, mut f: impl FnMut(usize, usize)) {
    let dim = grid.dim();
    let mut stride = 1usize;
    for d in (axis + 1)..dim {
        stride *= grid.axis(d).n;
    }
    let m = grid.axis(axis).n;
    let total = grid.node_count();
    let lines = total / m;
    let block = stride * m;
    for li in 0..lines {
        let outer = li / stride;
        let inner = li % stride;
        let base = outer * block + inner;
        f(stride, base);
    }
}

/// Type-II DCT: `X_k = Σ_n x_n cos(πk(2n+1)/(2N))` via an N-point FFT.
fn dct2(fwd: &Arc<dyn Fft<f64>>, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut v = vec![Complex::new(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        v[i] = Complex::new(x[2 * i], 0.0);
    }
    for i in 0..n / 2 {
        v[n - 1 - i] = Complex::new(x[2 * i + 1], 0.0);
    }
    fwd.process(&mut v);
    (0..n)
        .map(|k| {
            let th = -std::f64::consts::PI * k as f64 / (2.0 * n as f64);
            v[k].re * th.cos() - v[k].im * th.sin()
        })
        .collect()
}

/// Inverse of [`dct2`] (a scaled type-III DCT):
/// `x_n = (X_0 + 2 Σ_{k≥1} X_k cos(πk(2n+1)/(2N))) / N`.
fn dct3(inv: &Arc<dyn Fft<f64>>, xk: &[f64]) -> Vec<f64> {
    let n = xk.len();
    let mut v = vec![Complex::new(0.0, 0.0); n];
    v[0] = Complex::new(xk[0], 0.0);
    for k in 1..n {
        let th = std::f64::consts::PI * k as f64 / (2.0 * n as f64);
        let c = Complex::new(xk[k], -xk[n - k]);
        let w = Complex::new(th.cos(), th.sin());
        v[k] = c * w;
    }
    inv.process(&mut v);
    let mut x = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        x[2 * i] = v[i].re / n as f64;
    }
    for i in 0..n / 2 {
        x[2 * i + 1] = v[n - 1 - i].re / n as f64;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn naive_dct2(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        v * (std::f64::consts::PI * k as f64 * (2 * j + 1) as f64
                            / (2.0 * n as f64))
                            .cos()
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn dct2_matches_naive_and_roundtrips() {
        let ops = SpectralOps::new();
        for n in [4usize, 5, 8, 12] {
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 0.3).collect();
            let fwd = ops.plan(n, FftDirection::Forward);
            let inv = ops.plan(n, FftDirection::Inverse);
            let a = dct2(&fwd, &x);
            let b = naive_dct2(&x);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-12, "n={n} {u} vs {v}");
            }
            let back = dct3(&inv, &a);
            for (u, v) in back.iter().zip(&x) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    /// Dense Gaussian elimination oracle for (I - dt A) x = b.
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
                .unwrap();
            m.swap(col, piv);
            rhs.swap(col, piv);
            let d = m[col][col];
            for row in (col + 1)..n {
                let f = m[row][col] / d;
                if f == 0.0 {
                    continue;
                }
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut acc = rhs[row];
            for k in (row + 1)..n {
                acc -= m[row][k] * x[k];
            }
            x[row] = acc / m[row][row];
        }
        x
    }

    fn stencil_matrix(grid: &GridSpec, dt: f64) -> Vec<Vec<f64>> {
        let n = grid.node_count();
        let dim = grid.dim();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for lin in 0..n {
            let idx = grid.unindex(lin);
            for d in 0..dim {
                let ax = grid.axis(d);
                let m = ax.n;
                let w = dt / (ax.h * ax.h);
                for s in [-1isize, 1] {
                    let j = idx[d] as isize + s;
                    let jj = match ax.bc {
                        Boundary::Periodic => j.rem_euclid(m as isize) as usize,
                        Boundary::Neumann => j.clamp(0, m as isize - 1) as usize,
                    };
                    let mut nb = idx;
                    nb[d] = jj;
                    let nlin = grid.index(&nb);
                    a[lin][nlin] -= w;
                    a[lin][lin] += w;
                }
            }
        }
        a
    }

    #[test]
    fn screened_poisson_matches_dense_stencil_solve() {
        let ops = SpectralOps::new();
        // mixed periodic x neumann dual-style grid
        let primal = GridSpec::new(&[8, 9], &[Boundary::Periodic, Boundary::Neumann]).unwrap();
        let dual = primal.dual().unwrap();
        let g = dual.grid().clone();
        let n = g.node_count();
        let b: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 * 1.7).sin()))
            .collect();
        let dt = 0.037;
        let fast = ops.screened_poisson(&g, &b, dt);
        let a = stencil_matrix(&g, dt);
        let slow = dense_solve(&a, &b);
        for (u, v) in fast.iter().zip(&slow) {
            assert!((u - v).abs() < 1e-10, "{u} vs {v}");
        }
    }

    #[test]
    fn heat_step_damps_cosine_mode() {
        let ops = SpectralOps::new();
        let primal = GridSpec::periodic(1, 256).unwrap();
        let g = primal.dual().unwrap().grid().clone();
        let eps = 0.125;
        let dt = 0.01;
        let data: Vec<f64> = (0..g.node_count())
            .map(|i| {
                let x = g.axis(0).node(i);
                1.0 + eps * (2.0 * std::f64::consts::PI * x).cos()
            })
            .collect();
        let out = ops.screened_poisson(&g, &data, dt);
        // continuum factor 1/(1 + dt (2 pi)^2) up to O(h^2) stencil error
        let factor = 1.0 / (1.0 + dt * 4.0 * std::f64::consts::PI.powi(2));
        let x0 = g.axis(0).node(0);
        let expect = 1.0 + eps * factor * (2.0 * std::f64::consts::PI * x0).cos();
        assert!((out[0] - expect).abs() < 1e-4, "{} vs {}", out[0], expect);
        assert!((factor - 0.71695).abs() < 2e-5);
        // mass preserved to machine precision
        let mass_in: f64 = data.iter().sum();
        let mass_out: f64 = out.iter().sum();
        assert!((mass_in - mass_out).abs() < 1e-10 * mass_in.abs());
    }

    #[test]
    fn constant_density_unchanged() {
        let ops = SpectralOps::new();
        let g = GridSpec::neumann(2, 9).unwrap().dual().unwrap().grid().clone();
        let data = vec![1.0; g.node_count()];
        let out = ops.screened_poisson(&g, &data, 0.5);
        for v in out {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn axis_derivative_of_fourier_mode() {
        let ops = SpectralOps::new();
        let g = GridSpec::periodic(1, 64).unwrap().dual().unwrap().grid().clone();
        let tp = 2.0 * std::f64::consts::PI;
        let data: Vec<f64> = (0..g.node_count())
            .map(|i| (tp * g.axis(0).node(i)).sin())
            .collect();
        let d = ops.axis_derivative(&g, &data, 0);
        for (i, v) in d.iter().enumerate() {
            let expect = tp * (tp * g.axis(0).node(i)).cos();
            assert!((v - expect).abs() < 1e-10, "{v} vs {expect}");
        }
    }

    #[test]
    fn axis_derivative_of_cosine_mode_neumann() {
        let ops = SpectralOps::new();
        let g = GridSpec::neumann(1, 65).unwrap().dual().unwrap().grid().clone();
        let pi = std::f64::consts::PI;
        // f = cos(3 pi x) satisfies zero-flux at both walls
        let data: Vec<f64> = (0..g.node_count())
            .map(|i| (3.0 * pi * g.axis(0).node(i)).cos())
            .collect();
        let d = ops.axis_derivative(&g, &data, 0);
        for (i, v) in d.iter().enumerate() {
            let expect = -3.0 * pi * (3.0 * pi * g.axis(0).node(i)).sin();
            assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        }
    }

    #[test]
    fn mixed_derivative_via_two_axis_passes() {
        let ops = SpectralOps::new();
        let g = GridSpec::periodic(2, 32).unwrap().dual().unwrap().grid().clone();
        let tp = 2.0 * std::f64::consts::PI;
        let mut data = vec![0.0; g.node_count()];
        for lin in 0..g.node_count() {
            let idx = g.unindex(lin);
            let x = g.axis(0).node(idx[0]);
            let y = g.axis(1).node(idx[1]);
            data[lin] = (tp * x).sin() * (tp * y).cos();
        }
        let dx = ops.axis_derivative(&g, &data, 0);
        let dxy = ops.axis_derivative(&g, &dx, 1);
        for lin in (0..g.node_count()).step_by(17) {
            let idx = g.unindex(lin);
            let x = g.axis(0).node(idx[0]);
            let y = g.axis(1).node(idx[1]);
            let expect = -tp * tp * (tp * x).cos() * (tp * y).sin();
            assert!((dxy[lin] - expect).abs() < 1e-8);
        }
    }
}
