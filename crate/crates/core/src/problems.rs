//! Built-in test problems on the unit square and the L-shape.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Manufactured solution `u = sin(πx) sin(πy)` with `f = −Δu = 2π² u` and
/// density `ρ = 1`.
pub struct Example1;

impl Example1 {
    pub fn u(x: f64, y: f64) -> f64 {
        libm::sin(PI * x) * libm::sin(PI * y)
    }

    pub fn grad(x: f64, y: f64) -> (f64, f64) {
        (
            PI * libm::cos(PI * x) * libm::sin(PI * y),
            PI * libm::sin(PI * x) * libm::cos(PI * y),
        )
    }

    pub fn f(x: f64, y: f64) -> f64 {
        2.0 * PI * PI * Self::u(x, y)
    }

    pub fn rho(_x: f64, _y: f64) -> f64 {
        1.0
    }
}

/// The `k` smallest Dirichlet eigenvalues `(a² + b²)π²` of the unit square,
/// with multiplicity.
pub fn unit_square_eigenvalues(k: usize) -> Vec<f64> {
    let mut all = Vec::new();
    let top = k + 2;
    for a in 1..=top {
        for b in 1..=top {
            all.push(((a * a + b * b) as f64) * PI * PI);
        }
    }
    all.sort_by(|p, q| p.partial_cmp(q).unwrap());
    all.truncate(k);
    all
}

/// Third Dirichlet eigenvalue of `(0,2)² \ [1,2]²`, whose eigenfunction is
/// `sin(πx) sin(πy)`.
pub const L_SHAPE_LAMBDA3: f64 = 2.0 * PI * PI;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalue_list() {
        let l = unit_square_eigenvalues(6);
        let expect = [2.0, 5.0, 5.0, 8.0, 10.0, 10.0];
        for (a, b) in l.iter().zip(expect) {
            assert!((a - b * PI * PI).abs() < 1e-12);
        }
        assert!((l[0] - 19.739_208_802).abs() < 1e-8);
    }

    #[test]
    fn source_matches_laplacian() {
        // Second differences of u approximate −f.
        let (x, y, h) = (0.3, 0.6, 1e-4);
        let lap = (Example1::u(x + h, y) + Example1::u(x - h, y) + Example1::u(x, y + h)
            + Example1::u(x, y - h)
            - 4.0 * Example1::u(x, y))
            / (h * h);
        assert!((lap + Example1::f(x, y)).abs() < 1e-5);
        let (gx, _) = Example1::grad(x, y);
        let fd = (Example1::u(x + h, y) - Example1::u(x - h, y)) / (2.0 * h);
        assert!((gx - fd).abs() < 1e-6);
    }
}
