//! Low-discrepancy point sets (Halton sequences, bases 2, 3, 5).

use crate::grid::{Point, MAX_DIM};

/// Fixed sample count used for composition-error and projection residuals.
pub const RESIDUAL_SAMPLES: usize = 1024;

const BASES: [u64; MAX_DIM] = [2, 3, 5];

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let bf = b as f64;
    while i > 0 {
        f /= bf;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// The first `n` Halton points in `[0,1)^dim` (index starts at 1 to avoid
/// the origin).
pub fn sample_set(dim: usize, n: usize) -> Vec<Point> {
    (1..=n as u64)
        .map(|i| {
            let mut p = [0.0; MAX_DIM];
            for (d, slot) in p.iter_mut().enumerate().take(dim) {
                *slot = radical_inverse(i, BASES[d]);
            }
            p
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_base2_points() {
        let s = sample_set(1, 4);
        let xs: Vec<f64> = s.iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn points_fill_the_square_evenly() {
        let s = sample_set(2, 256);
        // every quadrant gets roughly a quarter of the points
        let mut counts = [0usize; 4];
        for p in &s {
            let q = (p[0] >= 0.5) as usize * 2 + (p[1] >= 0.5) as usize;
            counts[q] += 1;
        }
        for c in counts {
            assert!((c as i64 - 64).abs() <= 8, "{counts:?}");
        }
    }
}
