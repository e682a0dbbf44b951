//! Source and eigenvalue solvers: the saddle-point (Lagrange multiplier)
//! route, the reduced-basis route, and the RM interpolant diagnostic.

use alloc::vec;
use alloc::vec::Vec;

use faer::prelude::*;
use faer::sparse::SparseColMat;
use faer::{Mat, Side};

use crate::assembly::{AssembledSystem, ReducedSystem};
use crate::dense;
use crate::local;
use crate::mesh::RectGrid;
use crate::quadrature::GaussRule;
use crate::sparse::{dot, norm2, norm_inf, CsrMatrix, TripletBuilder};
use crate::spaces::SpaceKind;
use crate::{Error, Result};

/// Reduced dimension up to which eigenproblems use the dense path.
pub const DENSE_EIG_LIMIT: usize = 5000;

/// Solution of `[[K, Bᵀ], [B, 0]] [u; δ] = [F; 0]`.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    pub u: Vec<f64>,
    /// One multiplier per interior edge.
    pub delta: Vec<f64>,
    /// `‖KKT·x − rhs‖∞ / ‖rhs‖∞` after refinement.
    pub residual: f64,
    /// `‖B u‖∞`.
    pub constraint_residual: f64,
}

fn col_from(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn col_to_vec(m: &Mat<f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// Sparse LU factorization of the saddle-point matrix of a constrained
/// system, reusable across right-hand sides.
pub struct KktSolver {
    n: usize,
    r: usize,
    matrix: CsrMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl KktSolver {
    pub fn new(k: &CsrMatrix, b: &CsrMatrix) -> Result<Self> {
        let (n, r) = (k.nrows(), b.nrows());
        if b.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.ncols() });
        }
        let mut t = TripletBuilder::with_capacity(n + r, n + r, k.nnz() + 2 * b.nnz());
        for (i, j, v) in k.triplets() {
            t.push(i, j, v);
        }
        for (i, j, v) in b.triplets() {
            t.push(n + i, j, v);
            t.push(j, n + i, v);
        }
        let matrix = t.finish();
        // The sparse LU aborts on an exactly zero pivot, so rank-deficient
        // constraints are caught up front whenever a dense check is affordable.
        if r * n <= DENSE_RANK_LIMIT {
            let rank = dense::rank(b.to_dense().as_ref(), 1e-9);
            if rank < r {
                return Err(Error::SingularKkt { rank, rows: r });
            }
        }
        let csc: SparseColMat<usize, f64> = matrix.to_faer()?;
        let lu = csc.sp_lu().map_err(|_| Error::SingularKkt { rank: rank_or_unknown(b), rows: r })?;
        Ok(KktSolver { n, r, matrix, lu })
    }

    /// Solves with right-hand side `[top; bottom]` (bottom may be empty for
    /// zero) using one step of iterative refinement; returns the solution
    /// and its relative residual.
    pub fn solve(&self, top: &[f64], bottom: Option<&[f64]>) -> (Vec<f64>, f64) {
        let mut rhs = vec![0.0; self.n + self.r];
        rhs[..self.n].copy_from_slice(top);
        if let Some(b) = bottom {
            rhs[self.n..].copy_from_slice(b);
        }
        let mut x = col_to_vec(&self.lu.solve(&col_from(&rhs)), 0);
        let residual = |x: &[f64]| -> Vec<f64> {
            let ax = self.matrix.matvec(x);
            rhs.iter().zip(ax).map(|(b, a)| b - a).collect()
        };
        let r = residual(&x);
        let dx = self.lu.solve(&col_from(&r));
        for (xi, i) in x.iter_mut().zip(0..) {
            *xi += dx[(i, 0)];
        }
        let scale = norm_inf(&rhs).max(f64::MIN_POSITIVE);
        let rel = norm_inf(&residual(&x)) / scale;
        (x, rel)
    }

    pub fn primal_dim(&self) -> usize {
        self.n
    }
}

/// Largest `rows × cols` of a constraint matrix whose rank is checked densely.
const DENSE_RANK_LIMIT: usize = 4_000_000;

fn rank_or_unknown(b: &CsrMatrix) -> usize {
    if b.nrows() * b.ncols() <= DENSE_RANK_LIMIT {
        dense::rank(b.to_dense().as_ref(), 1e-9)
    } else {
        0
    }
}

pub fn solve_source_saddle(sys: &AssembledSystem) -> Result<SaddleSolution> {
    let b = sys.b.as_ref().ok_or(Error::Precondition("saddle-point solve needs constraints"))?;
    let kkt = KktSolver::new(&sys.k, &b.matrix)?;
    let (x, residual) = kkt.solve(&sys.f, None);
    let n = sys.ndofs();
    let singular = || Error::SingularKkt { rank: rank_or_unknown(&b.matrix), rows: b.nrows() };
    if !x.iter().all(|v| v.is_finite()) || residual > 1e-6 {
        return Err(singular());
    }
    let u = x[..n].to_vec();
    let constraint_residual = norm_inf(&b.matrix.matvec(&u));
    if constraint_residual > 1e-9 * norm_inf(&u).max(f64::MIN_POSITIVE) && norm_inf(&u) > 0.0 {
        return Err(singular());
    }
    Ok(SaddleSolution { u, delta: x[n..].to_vec(), residual, constraint_residual })
}

/// Sparse Cholesky solve of `A x = rhs` for symmetric positive definite `A`.
pub fn solve_spd(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != rhs.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: rhs.len() });
    }
    if rhs.is_empty() {
        return Ok(Vec::new());
    }
    let chol = a
        .to_faer()?
        .sp_cholesky(Side::Lower)
        .map_err(|_| Error::Factorization("matrix is not positive definite"))?;
    let x = col_to_vec(&chol.solve(&col_from(rhs)), 0);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Factorization("matrix is not positive definite"));
    }
    Ok(x)
}

/// Coefficients of the source solution in the reduced basis.
pub fn solve_source_reduced(red: &ReducedSystem) -> Result<Vec<f64>> {
    solve_spd(&red.k, &red.f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Dense,
    ShiftInvert { iterations: usize },
    ConstrainedInverseIteration { iterations: usize },
}

/// Smallest eigenpairs with `M`-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub method: EigenMethod,
    /// `max_i ‖K u_i − λ_i M u_i‖∞ / ‖K‖∞` (projected onto `ker B` for
    /// constrained problems).
    pub max_residual: f64,
}

/// Makes the largest-magnitude entry of `v` positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if libm::fabs(x) > best * (1.0 + 1e-12) {
            best = libm::fabs(x);
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual_norm(k: &CsrMatrix, m: &CsrMatrix, lambda: f64, v: &[f64]) -> f64 {
    let kv = k.matvec(v);
    let mv = m.matvec(v);
    let r: Vec<f64> = kv.iter().zip(mv).map(|(a, b)| a - lambda * b).collect();
    norm_inf(&r) / k.norm_inf().max(f64::MIN_POSITIVE)
}

fn finish(k: &CsrMatrix, m: &CsrMatrix, values: Vec<f64>, mut vectors: Vec<Vec<f64>>, method: EigenMethod) -> EigenResult {
    vectors.iter_mut().for_each(|v| fix_sign(v));
    let max_residual = values
        .iter()
        .zip(&vectors)
        .map(|(l, v)| residual_norm(k, m, *l, v))
        .fold(0.0, f64::max);
    EigenResult { values, vectors, method, max_residual }
}

pub fn eig_smallest(red: &ReducedSystem, k: usize) -> Result<EigenResult> {
    eig_pencil(&red.k, &red.m, k, DENSE_EIG_LIMIT)
}

/// RM eigenpairs straight from the assembled (unconstrained) system.
pub fn eig_rm(sys: &AssembledSystem, k: usize) -> Result<EigenResult> {
    if sys.kind() != SpaceKind::Rm {
        return Err(Error::Precondition("eig_rm needs an RM system"));
    }
    eig_pencil(&sys.k, &sys.m, k, DENSE_EIG_LIMIT)
}

/// `k` smallest eigenpairs of `K x = λ M x`; dense up to `dense_limit`,
/// shift-invert subspace iteration above.
pub fn eig_pencil(k_mat: &CsrMatrix, m_mat: &CsrMatrix, k: usize, dense_limit: usize) -> Result<EigenResult> {
    let n = k_mat.nrows();
    if k == 0 || k > n {
        return Err(Error::Precondition("number of eigenvalues must be between 1 and the dimension"));
    }
    if m_mat.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m_mat.nrows() });
    }
    if n <= dense_limit {
        let (values, vecs) = dense::generalized_sym_eig(k_mat.to_dense().as_ref(), m_mat.to_dense().as_ref(), k)?;
        let vectors = (0..k).map(|j| col_to_vec(&vecs, j)).collect();
        return Ok(finish(k_mat, m_mat, values, vectors, EigenMethod::Dense));
    }
    shift_invert(k_mat, m_mat, k)
}

/// Deterministic start block.
fn start_block(n: usize, p: usize) -> Mat<f64> {
    Mat::from_fn(n, p, |i, j| libm::sin(0.7 * (i as f64 + 1.0) * (j as f64 + 1.0) + 0.3 * j as f64) + 0.1)
}

/// Rayleigh–Ritz on the span of `y`: returns Ritz values and vectors in the
/// full space, `M`-orthonormal.
fn rayleigh_ritz(k_mat: &CsrMatrix, m_mat: &CsrMatrix, y: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let q = y.qr().compute_thin_q();
    let p = q.ncols();
    let kq = Mat::from_fn(q.nrows(), p, |i, j| 0.0 * q[(i, j)]);
    let mut kq = kq;
    let mut mq = Mat::<f64>::zeros(q.nrows(), p);
    for j in 0..p {
        let c = col_to_vec(&q, j);
        let a = k_mat.matvec(&c);
        let b = m_mat.matvec(&c);
        for i in 0..q.nrows() {
            kq[(i, j)] = a[i];
            mq[(i, j)] = b[i];
        }
    }
    let kp = q.transpose() * &kq;
    let mp = q.transpose() * &mq;
    let kp = Mat::from_fn(p, p, |i, j| 0.5 * (kp[(i, j)] + kp[(j, i)]));
    let mp = Mat::from_fn(p, p, |i, j| 0.5 * (mp[(i, j)] + mp[(j, i)]));
    let (vals, vecs) = dense::generalized_sym_eig(kp.as_ref(), mp.as_ref(), p)?;
    Ok((vals, &q * &vecs))
}

fn shift_invert(k_mat: &CsrMatrix, m_mat: &CsrMatrix, k: usize) -> Result<EigenResult> {
    let n = k_mat.nrows();
    let trace = |a: &CsrMatrix| (0..n).map(|i| a.get(i, i)).sum::<f64>();
    let sigma = 1e-8 * trace(k_mat) / trace(m_mat).max(f64::MIN_POSITIVE);
    let mut shifted = m_mat.clone();
    shifted.scale(sigma);
    let entries: Vec<_> = k_mat.triplets().chain(shifted.triplets()).collect();
    let a = CsrMatrix::from_triplets(n, n, &entries);
    let chol = a
        .to_faer()?
        .sp_cholesky(Side::Lower)
        .map_err(|_| Error::Factorization("shifted stiffness is not positive definite"))?;

    let p = (2 * k + 8).min(n);
    let mut x = start_block(n, p);
    let mut prev: Vec<f64> = vec![f64::INFINITY; k];
    for it in 1..=1000 {
        let mut mx = Mat::<f64>::zeros(n, p);
        for j in 0..p {
            let v = m_mat.matvec(&col_to_vec(&x, j));
            for i in 0..n {
                mx[(i, j)] = v[i];
            }
        }
        let y = chol.solve(&mx);
        let (vals, vecs) = rayleigh_ritz(k_mat, m_mat, &y)?;
        x = vecs;
        let values: Vec<f64> = vals[..k].to_vec();
        let change = values
            .iter()
            .zip(&prev)
            .map(|(a, b)| libm::fabs(a - b) / libm::fabs(*a).max(1e-300))
            .fold(0.0, f64::max);
        prev = values.clone();
        let vectors: Vec<Vec<f64>> = (0..k).map(|j| col_to_vec(&x, j)).collect();
        let res = values
            .iter()
            .zip(&vectors)
            .map(|(l, v)| residual_norm(k_mat, m_mat, *l, v))
            .fold(0.0, f64::max);
        if res < 1e-10 || (change < 1e-14 && res < 1e-8) {
            return Ok(finish(k_mat, m_mat, values, vectors, EigenMethod::ShiftInvert { iterations: it }));
        }
    }
    Err(Error::NoConvergence { iterations: 1000, residual: f64::NAN })
}

/// Smallest eigenpairs of a constrained system, `K u = λ M u` on `ker B`,
/// by block inverse iteration through the saddle-point factorization, so
/// every iterate satisfies the constraints. Used where no explicit basis is
/// available (L-shaped domains).
pub fn eig_constrained(sys: &AssembledSystem, k: usize) -> Result<EigenResult> {
    let b = sys.b.as_ref().ok_or(Error::Precondition("constrained eigensolve needs constraints"))?;
    let n = sys.ndofs();
    let kernel_dim = n.saturating_sub(b.nrows());
    if k == 0 || k > kernel_dim {
        return Err(Error::Precondition("number of eigenvalues must be between 1 and the dimension"));
    }
    let kkt = KktSolver::new(&sys.k, &b.matrix)?;
    let p = (2 * k + 8).min(kernel_dim);
    let mut x = start_block(n, p);
    let mut prev: Vec<f64> = vec![f64::INFINITY; k];
    for it in 1..=2000 {
        let mut y = Mat::<f64>::zeros(n, p);
        for j in 0..p {
            let mx = sys.m.matvec(&col_to_vec(&x, j));
            let (sol, rel) = kkt.solve(&mx, None);
            if !(rel < 1e-6) {
                return Err(Error::SingularKkt { rank: rank_or_unknown(&b.matrix), rows: b.nrows() });
            }
            for i in 0..n {
                y[(i, j)] = sol[i];
            }
        }
        let (vals, vecs) = rayleigh_ritz(&sys.k, &sys.m, &y)?;
        x = vecs;
        let values: Vec<f64> = vals[..k].to_vec();
        let change = values
            .iter()
            .zip(&prev)
            .map(|(a, b)| libm::fabs(a - b) / libm::fabs(*a).max(1e-300))
            .fold(0.0, f64::max);
        prev = values.clone();
        if change < 1e-13 {
            let mut vectors: Vec<Vec<f64>> = (0..k).map(|j| col_to_vec(&x, j)).collect();
            vectors.iter_mut().for_each(|v| fix_sign(v));
            // Residual projected onto ker B: a KKT solve with the residual as
            // load returns its ker-B component in the K-inner product.
            let mut max_residual = 0.0f64;
            for (l, v) in values.iter().zip(&vectors) {
                let kv = sys.k.matvec(v);
                let mv = sys.m.matvec(v);
                let r: Vec<f64> = kv.iter().zip(&mv).map(|(a, c)| a - l * c).collect();
                let (z, _) = kkt.solve(&r, None);
                max_residual = max_residual.max(libm::sqrt(libm::fabs(dot(&z[..n], &sys.k.matvec(&z[..n])))) / norm2(v).max(1e-300) / sys.k.norm_inf());
            }
            return Ok(EigenResult {
                values,
                vectors,
                method: EigenMethod::ConstrainedInverseIteration { iterations: it },
                max_residual,
            });
        }
    }
    Err(Error::NoConvergence { iterations: 2000, residual: f64::NAN })
}

/// `a_h(u − Π u, Π u)` for the cellwise RM interpolant `Π u`, together with
/// its ratio to `h²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolantDiagnostic {
    pub h: f64,
    pub value: f64,
    pub ratio: f64,
}

/// The interpolant takes vertex values of `u` and edge means of `∂x u`,
/// `∂y u` (Gauss quadrature along edges); the bilinear form is integrated
/// cellwise with a 6×6 Gauss rule.
pub fn rm_interpolant_diagnostic(
    grid: &RectGrid,
    u: &dyn Fn(f64, f64) -> f64,
    grad: &dyn Fn(f64, f64) -> (f64, f64),
) -> Result<InterpolantDiagnostic> {
    let rule = GaussRule::with_order(6);
    let mut value = 0.0;
    for c in grid.active_cells() {
        let cell = grid.cell_by_id(c);
        let rm = local::rm_basis(cell)?;
        let verts = cell.vertices();
        let (x0, x1, y0, y1) = (cell.x0, cell.x1(), cell.y0, cell.y1());
        let dofs = [
            u(verts[0].0, verts[0].1),
            u(verts[1].0, verts[1].1),
            u(verts[2].0, verts[2].1),
            u(verts[3].0, verts[3].1),
            rule.integrate_line(y0, y1, |y| grad(x0, y).0) / cell.height,
            rule.integrate_line(x0, x1, |x| grad(x, y0).1) / cell.width,
            rule.integrate_line(y0, y1, |y| grad(x1, y).0) / cell.height,
            rule.integrate_line(x0, x1, |x| grad(x, y1).1) / cell.width,
        ];
        let mut pi = local::LocalQuad::zero(cell);
        for (d, f) in dofs.iter().zip(&rm.funcs) {
            pi = pi.axpy(*d, f);
        }
        value += rule.integrate(&cell, |x, y| {
            let (gx, gy) = grad(x, y);
            let (px, py) = pi.grad(x, y);
            (gx - px) * px + (gy - py) * py
        });
    }
    let h = grid.h();
    Ok(InterpolantDiagnostic { h, value, ratio: value / (h * h) })
}
