//! Polynomials on a single cell, the local bases built from them, the
//! compatibility conditions characterising the MC and RRM constraints, and
//! element matrices.
//!
//! Every polynomial is stored in the cell's scaled coordinates
//! `s = 2(x − x_c)/w`, `t = 2(y − y_c)/h`, which map the cell onto `[-1, 1]²`.

use alloc::vec::Vec;

use crate::dense;
use crate::mesh::CellGeom;
use crate::quadrature::GaussRule;
use crate::{Error, Result};

/// Number of stored monomials: `1, s, t, s², st, t², s³, t³`.
pub const NCOEF: usize = 8;

/// Relative tolerance of the compatibility checks.
pub const COMPAT_TOL: f64 = 1e-10;

/// A polynomial in `P2(K) + span{s³, t³}` on one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalQuad {
    pub cell: CellGeom,
    pub coef: [f64; NCOEF],
}

/// Cell edges in the order `Γ1..Γ4`: left, bottom, right, top.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalEdge {
    Left,
    Bottom,
    Right,
    Top,
}

impl LocalEdge {
    pub const ALL: [LocalEdge; 4] = [LocalEdge::Left, LocalEdge::Bottom, LocalEdge::Right, LocalEdge::Top];

    /// Sign of the outward normal relative to the global `+x`/`+y`
    /// orientation.
    pub fn outward_sign(self) -> f64 {
        match self {
            LocalEdge::Left | LocalEdge::Bottom => -1.0,
            LocalEdge::Right | LocalEdge::Top => 1.0,
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, LocalEdge::Left | LocalEdge::Right)
    }
}

impl LocalQuad {
    pub fn zero(cell: CellGeom) -> Self {
        LocalQuad { cell, coef: [0.0; NCOEF] }
    }

    pub fn new(cell: CellGeom, coef: [f64; NCOEF]) -> Self {
        LocalQuad { cell, coef }
    }

    /// Quadratic with coefficients of `1, s, t, s², st, t²`.
    pub fn quadratic(cell: CellGeom, c: [f64; 6]) -> Self {
        let mut coef = [0.0; NCOEF];
        coef[..6].copy_from_slice(&c);
        LocalQuad { cell, coef }
    }

    /// Restriction of the global quadratic
    /// `a0 + a1 x + a2 y + a3 x² + a4 xy + a5 y²` to the cell.
    pub fn from_global_quadratic(cell: CellGeom, a: [f64; 6]) -> Self {
        let (xc, yc) = cell.center();
        let (hw, hh) = (0.5 * cell.width, 0.5 * cell.height);
        // x = xc + hw s, y = yc + hh t
        let c0 = a[0] + a[1] * xc + a[2] * yc + a[3] * xc * xc + a[4] * xc * yc + a[5] * yc * yc;
        let cs = hw * (a[1] + 2.0 * a[3] * xc + a[4] * yc);
        let ct = hh * (a[2] + a[4] * xc + 2.0 * a[5] * yc);
        let css = a[3] * hw * hw;
        let cst = a[4] * hw * hh;
        let ctt = a[5] * hh * hh;
        LocalQuad::quadratic(cell, [c0, cs, ct, css, cst, ctt])
    }

    pub fn is_quadratic(&self) -> bool {
        self.coef[6] == 0.0 && self.coef[7] == 0.0
    }

    pub fn to_ref(&self, x: f64, y: f64) -> (f64, f64) {
        let (xc, yc) = self.cell.center();
        (2.0 * (x - xc) / self.cell.width, 2.0 * (y - yc) / self.cell.height)
    }

    pub fn eval_ref(&self, s: f64, t: f64) -> f64 {
        let c = &self.coef;
        c[0] + c[1] * s + c[2] * t + c[3] * s * s + c[4] * s * t + c[5] * t * t
            + c[6] * s * s * s
            + c[7] * t * t * t
    }

    /// Physical gradient at a reference point.
    pub fn grad_ref(&self, s: f64, t: f64) -> (f64, f64) {
        let c = &self.coef;
        let ds = c[1] + 2.0 * c[3] * s + c[4] * t + 3.0 * c[6] * s * s;
        let dt = c[2] + c[4] * s + 2.0 * c[5] * t + 3.0 * c[7] * t * t;
        (2.0 * ds / self.cell.width, 2.0 * dt / self.cell.height)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (s, t) = self.to_ref(x, y);
        self.eval_ref(s, t)
    }

    pub fn grad(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, t) = self.to_ref(x, y);
        self.grad_ref(s, t)
    }

    /// Physical second derivatives `(∂xx, ∂xy, ∂yy)`.
    pub fn hessian(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (s, t) = self.to_ref(x, y);
        let c = &self.coef;
        let (ax, ay) = (2.0 / self.cell.width, 2.0 / self.cell.height);
        (
            ax * ax * (2.0 * c[3] + 6.0 * c[6] * s),
            ax * ay * c[4],
            ay * ay * (2.0 * c[5] + 6.0 * c[7] * t),
        )
    }

    /// `self + a · other`; both must live on the same cell.
    pub fn axpy(&self, a: f64, other: &LocalQuad) -> LocalQuad {
        let mut out = *self;
        for (o, c) in out.coef.iter_mut().zip(other.coef) {
            *o += a * c;
        }
        out
    }

    pub fn scaled(&self, a: f64) -> LocalQuad {
        let mut out = *self;
        out.coef.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// Values at the vertices `a1..a4`, counterclockwise from lower-left.
    pub fn vertex_values(&self) -> [f64; 4] {
        [
            self.eval_ref(-1.0, -1.0),
            self.eval_ref(1.0, -1.0),
            self.eval_ref(1.0, 1.0),
            self.eval_ref(-1.0, 1.0),
        ]
    }

    /// Mean over an edge of `∂x` (vertical edges) or `∂y` (horizontal
    /// edges), i.e. with the global orientation.
    pub fn edge_mean_derivative(&self, edge: LocalEdge) -> f64 {
        let c = &self.coef;
        // Averaging over the free coordinate kills odd terms and turns the
        // square into 1/3.
        match edge {
            LocalEdge::Left | LocalEdge::Right => {
                let s = if edge == LocalEdge::Left { -1.0 } else { 1.0 };
                2.0 * (c[1] + 2.0 * c[3] * s + 3.0 * c[6] * s * s) / self.cell.width
            }
            LocalEdge::Bottom | LocalEdge::Top => {
                let t = if edge == LocalEdge::Bottom { -1.0 } else { 1.0 };
                2.0 * (c[2] + 2.0 * c[5] * t + 3.0 * c[7] * t * t) / self.cell.height
            }
        }
    }

    /// Edge means of the global-orientation derivatives in `Γ1..Γ4` order.
    pub fn edge_means(&self) -> [f64; 4] {
        LocalEdge::ALL.map(|e| self.edge_mean_derivative(e))
    }

    /// Values at the eight boundary Gauss points
    /// `g11, g12, g21, g22, g31, g32, g41, g42`.
    pub fn gauss_values(&self) -> [f64; 8] {
        mc_gauss_points_ref().map(|(s, t)| self.eval_ref(s, t))
    }

    /// Wilson degrees of freedom of a quadratic: the four vertex values and
    /// the coefficients of the normalized bubbles `(1 − s²)/4`, `(1 − t²)/4`.
    pub fn wilson_dofs(&self) -> [f64; 6] {
        let v = self.vertex_values();
        [v[0], v[1], v[2], v[3], -4.0 * self.coef[3], -4.0 * self.coef[5]]
    }
}

/// The six Wilson functions of a cell, `φ_a1..φ_a4, φ_xx, φ_yy`, with
/// `φ_xx = x(ξ − x)` and `φ_yy = y(η − y)` in corner-local coordinates.
#[derive(Debug, Clone, Copy)]
pub struct WilsonBasis {
    pub funcs: [LocalQuad; 6],
}

pub fn wilson_basis(cell: CellGeom) -> Result<WilsonBasis> {
    let cell = CellGeom::new(cell.x0, cell.y0, cell.width, cell.height)?;
    let (w2, h2) = (0.25 * cell.width * cell.width, 0.25 * cell.height * cell.height);
    let q = |c| LocalQuad::quadratic(cell, c);
    Ok(WilsonBasis {
        funcs: [
            q([0.25, -0.25, -0.25, 0.0, 0.25, 0.0]),
            q([0.25, 0.25, -0.25, 0.0, -0.25, 0.0]),
            q([0.25, 0.25, 0.25, 0.0, 0.25, 0.0]),
            q([0.25, -0.25, 0.25, 0.0, -0.25, 0.0]),
            q([w2, 0.0, 0.0, -w2, 0.0, 0.0]),
            q([h2, 0.0, 0.0, 0.0, 0.0, -h2]),
        ],
    })
}

/// The Wilson basis with bubbles divided by `ξ²` and `η²`; this is the local
/// basis behind every global Wilson coefficient vector in the crate.
pub fn wilson_basis_normalized(cell: CellGeom) -> [LocalQuad; 6] {
    let q = |c| LocalQuad::quadratic(cell, c);
    [
        q([0.25, -0.25, -0.25, 0.0, 0.25, 0.0]),
        q([0.25, 0.25, -0.25, 0.0, -0.25, 0.0]),
        q([0.25, 0.25, 0.25, 0.0, 0.25, 0.0]),
        q([0.25, -0.25, 0.25, 0.0, -0.25, 0.0]),
        q([0.25, 0.0, 0.0, -0.25, 0.0, 0.0]),
        q([0.25, 0.0, 0.0, 0.0, 0.0, -0.25]),
    ]
}

/// `φ_xx/ξ² + φ_yy/η² − θ1θ2`, which vanishes at the eight boundary Gauss
/// points of the cell.
pub fn bubble_phi0(cell: CellGeom) -> LocalQuad {
    let g = GaussRule::new();
    let c = g.theta1 * g.theta2;
    LocalQuad::quadratic(cell, [0.5 - c, 0.0, 0.0, -0.25, 0.0, -0.25])
}

/// Reference coordinates of the boundary Gauss points, counterclockwise:
/// bottom (`g11`, `g12`), right, top, left.
pub fn mc_gauss_points_ref() -> [(f64, f64); 8] {
    let g = GaussRule::new();
    let (a, b) = (2.0 * g.theta1 - 1.0, 2.0 * g.theta2 - 1.0);
    [(a, -1.0), (b, -1.0), (1.0, a), (1.0, b), (b, 1.0), (a, 1.0), (-1.0, b), (-1.0, a)]
}

/// Physical boundary Gauss points of a cell, in the order of
/// [`mc_gauss_points_ref`].
pub fn mc_gauss_points(cell: &CellGeom) -> [(f64, f64); 8] {
    let (xc, yc) = cell.center();
    mc_gauss_points_ref().map(|(s, t)| (xc + 0.5 * cell.width * s, yc + 0.5 * cell.height * t))
}

/// Whether eight Gauss-point values are the traces of a single quadratic on
/// the cell. The conditions do not depend on the cell size.
pub fn check_compat_mc(g: &[f64; 8]) -> bool {
    let q = GaussRule::new();
    let (t1, t2) = (q.theta1, q.theta2);
    let [g11, g12, g21, g22, g31, g32, g41, g42] = *g;
    let scale = g.iter().fold(1e-300f64, |m, v| m.max(libm::fabs(*v)));
    let c1 = g11 - g12 + g21 - g22 + g31 - g32 + g41 - g42;
    let c2 = t1 * (g11 - g32) + t2 * (g31 - g12) + (g21 - g22);
    let c3 = t1 * (g11 - g12) + (t2 - t1) * (g22 - g41) + t2 * (g32 - g31);
    [c1, c2, c3].iter().all(|c| libm::fabs(*c) <= COMPAT_TOL * scale)
}

/// Whether vertex values `alphas` (`a1..a4`) and edge means `betas` (`∂x` on
/// `Γ1`, `∂y` on `Γ2`, `∂x` on `Γ3`, `∂y` on `Γ4`) belong to a single
/// quadratic on an `l × h` cell.
pub fn check_compat_rrm(alphas: &[f64; 4], betas: &[f64; 4], l: f64, h: f64) -> bool {
    let [a1, a2, a3, a4] = *alphas;
    let [b1, b2, b3, b4] = *betas;
    let terms = [(a3 - a4) / l, (a2 - a1) / l, (a3 - a2) / h, (a4 - a1) / h, b1, b2, b3, b4];
    let scale = terms.iter().fold(1e-300f64, |m, v| m.max(libm::fabs(*v)));
    let c1 = (a3 - a4) / l + (a2 - a1) / l - (b1 + b3);
    let c2 = (a3 - a2) / h + (a4 - a1) / h - (b2 + b4);
    libm::fabs(c1) <= COMPAT_TOL * scale && libm::fabs(c2) <= COMPAT_TOL * scale
}

/// Mean over a cell edge of the outward normal derivative.
pub fn edge_mean_normal_derivative(p: &LocalQuad, edge: LocalEdge) -> f64 {
    edge.outward_sign() * p.edge_mean_derivative(edge)
}

/// Stiffness, mass and load of a local basis; matrices are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrices {
    pub size: usize,
    pub stiffness: Vec<f64>,
    pub mass: Vec<f64>,
    pub load: Vec<f64>,
}

/// Element matrices of `basis` on its cell with 4×4 Gauss quadrature, which
/// is exact for stiffness and for mass with constant density.
pub fn local_matrices(
    basis: &[LocalQuad],
    cell: &CellGeom,
    rule: &GaussRule,
    rho: &dyn Fn(f64, f64) -> f64,
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<LocalMatrices> {
    let k = basis.len();
    let mut out = LocalMatrices {
        size: k,
        stiffness: alloc::vec![0.0; k * k],
        mass: alloc::vec![0.0; k * k],
        load: alloc::vec![0.0; k],
    };
    let mut vals = alloc::vec![0.0; k];
    let mut grads = alloc::vec![(0.0, 0.0); k];
    let (xc, yc) = cell.center();
    let jac = 0.25 * cell.width * cell.height;
    for (&(s, t), &w) in rule.points.iter().zip(&rule.weights) {
        let (x, y) = (xc + 0.5 * cell.width * s, yc + 0.5 * cell.height * t);
        let r = rho(x, y);
        if !(r > 0.0) {
            return Err(Error::NonPositiveDensity { value: r, x, y });
        }
        let fx = f(x, y);
        for (a, p) in basis.iter().enumerate() {
            vals[a] = p.eval_ref(s, t);
            grads[a] = p.grad_ref(s, t);
        }
        let wj = w * jac;
        for a in 0..k {
            out.load[a] += wj * r * fx * vals[a];
            for b in 0..k {
                out.stiffness[a * k + b] += wj * (grads[a].0 * grads[b].0 + grads[a].1 * grads[b].1);
                out.mass[a * k + b] += wj * r * vals[a] * vals[b];
            }
        }
    }
    Ok(out)
}

/// Local basis of the rectangular Morley element, dual to the degrees of
/// freedom `v(a1)..v(a4)` followed by the edge means of `∂x` on `Γ1`, `∂y`
/// on `Γ2`, `∂x` on `Γ3`, `∂y` on `Γ4`.
#[derive(Debug, Clone, Copy)]
pub struct RmBasis {
    pub funcs: [LocalQuad; 8],
    /// 2-norm condition number of the degree-of-freedom matrix.
    pub condition: f64,
}

/// Degrees of freedom of a polynomial in the RM ordering.
pub fn rm_dofs(p: &LocalQuad) -> [f64; 8] {
    let v = p.vertex_values();
    let e = p.edge_means();
    [v[0], v[1], v[2], v[3], e[0], e[1], e[2], e[3]]
}

pub fn rm_basis(cell: CellGeom) -> Result<RmBasis> {
    let cell = CellGeom::new(cell.x0, cell.y0, cell.width, cell.height)?;
    let mut d = [0.0; 64];
    for j in 0..NCOEF {
        let mut coef = [0.0; NCOEF];
        coef[j] = 1.0;
        let dofs = rm_dofs(&LocalQuad::new(cell, coef));
        for i in 0..8 {
            d[i * 8 + j] = dofs[i];
        }
    }
    let dm = dense::from_row_major(8, 8, &d);
    let condition = dense::condition_number(dm.as_ref());
    let inv = dense::inverse(dm.as_ref())?;
    let funcs = core::array::from_fn(|k| {
        let coef = core::array::from_fn(|j| inv[(j, k)]);
        LocalQuad::new(cell, coef)
    });
    Ok(RmBasis { funcs, condition })
}
