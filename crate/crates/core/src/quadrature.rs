//! Gauss–Legendre rules on intervals and tensor rules on cells.

use alloc::vec::Vec;

use crate::mesh::CellGeom;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending. Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule needs at least one point");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    for k in 0..(n + 1) / 2 {
        let mut x = libm::cos(core::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if libm::fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The two-point Gauss coordinates on `[0, 1]` together with the 4×4 tensor
/// rule on the reference square `[-1, 1]²`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub theta1: f64,
    pub theta2: f64,
    /// Reference points `(s, t)` of the tensor rule.
    pub points: Vec<(f64, f64)>,
    /// Reference weights, summing to 4.
    pub weights: Vec<f64>,
    /// 1-D nodes on `[-1, 1]` used for edge integrals.
    pub line_nodes: Vec<f64>,
    pub line_weights: Vec<f64>,
}

pub const CELL_POINTS_PER_DIR: usize = 4;

impl Default for GaussRule {
    fn default() -> Self {
        Self::new()
    }
}

impl GaussRule {
    pub fn new() -> Self {
        Self::with_order(CELL_POINTS_PER_DIR)
    }

    pub fn with_order(q: usize) -> Self {
        let r = 0.5 / libm::sqrt(3.0);
        let (line_nodes, line_weights) = gauss_legendre(q);
        let mut points = Vec::with_capacity(q * q);
        let mut weights = Vec::with_capacity(q * q);
        for (ty, wy) in line_nodes.iter().zip(&line_weights) {
            for (tx, wx) in line_nodes.iter().zip(&line_weights) {
                points.push((*tx, *ty));
                weights.push(wx * wy);
            }
        }
        GaussRule { theta1: 0.5 - r, theta2: 0.5 + r, points, weights, line_nodes, line_weights }
    }

    /// Physical quadrature points and weights on a cell.
    pub fn on_cell<'a>(&'a self, cell: &'a CellGeom) -> impl Iterator<Item = ((f64, f64), f64)> + 'a {
        let (xc, yc) = cell.center();
        let jac = 0.25 * cell.width * cell.height;
        self.points.iter().zip(&self.weights).map(move |(&(s, t), w)| {
            ((xc + 0.5 * cell.width * s, yc + 0.5 * cell.height * t), w * jac)
        })
    }

    /// Integral of `f` over the cell.
    pub fn integrate(&self, cell: &CellGeom, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.on_cell(cell).map(|((x, y), w)| w * f(x, y)).sum()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate_line(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.line_nodes
            .iter()
            .zip(&self.line_weights)
            .map(|(t, w)| w * half * f(mid + half * t))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_identities() {
        let g = GaussRule::new();
        assert!((g.theta1 + g.theta2 - 1.0).abs() < 1e-15);
        assert!((g.theta1 * g.theta2 - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn known_four_point_rule() {
        let (x, w) = gauss_legendre(4);
        assert!((x[3] - 0.861_136_311_594_052_6).abs() < 1e-15);
        assert!((x[2] - 0.339_981_043_584_856_3).abs() < 1e-15);
        assert!((w[3] - 0.347_854_845_137_453_9).abs() < 1e-15);
        assert!((w[2] - 0.652_145_154_862_546_1).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_rule_exact_through_degree_seven() {
        let g = GaussRule::new();
        let cell = CellGeom::new(0.3, -0.2, 0.7, 1.9).unwrap();
        let antideriv = |a: i32, lo: f64, hi: f64| {
            (libm::pow(hi, (a + 1) as f64) - libm::pow(lo, (a + 1) as f64)) / (a + 1) as f64
        };
        for a in 0..=7 {
            for b in 0..=7 {
                let exact = antideriv(a, cell.x0, cell.x1()) * antideriv(b, cell.y0, cell.y1());
                let got = g.integrate(&cell, |x, y| libm::pow(x, a as f64) * libm::pow(y, b as f64));
                let rel = (got - exact).abs() / exact.abs().max(1e-300);
                assert!(rel < 1e-13 || (got - exact).abs() < 1e-15, "x^{a} y^{b}: {rel}");
            }
        }
    }

    #[test]
    fn line_rule_integrates_cubics() {
        let g = GaussRule::new();
        let v = g.integrate_line(1.0, 3.0, |x| x * x * x - x);
        assert!((v - (20.0 - 4.0)).abs() < 1e-13);
    }
}
