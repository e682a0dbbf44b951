//! Small dense linear-algebra helpers on top of faer.

use alloc::vec::Vec;

use faer::prelude::*;
use faer::{Mat, MatRef, Side};

use crate::{Error, Result};

/// Row-major slice to a faer matrix.
pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Mat<f64> {
    debug_assert_eq!(data.len(), rows * cols);
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Numerical rank by column-pivoted QR: diagonal entries of `R` above
/// `rel_tol · |R₀₀|` are counted.
pub fn rank(a: MatRef<'_, f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let r = a.col_piv_qr().compute_r();
    let d = a.nrows().min(a.ncols());
    let top = libm::fabs(r[(0, 0)]);
    if top == 0.0 {
        return 0;
    }
    (0..d).filter(|&i| libm::fabs(r[(i, i)]) > rel_tol * top).count()
}

/// Orthonormal basis of the right nullspace of `a`, from a column-pivoted
/// QR factorization of `aᵀ`: the trailing columns of `Q` past the numerical
/// rank (`|r_ii| > rel_tol · |r_00|`).
pub fn nullspace(a: MatRef<'_, f64>, rel_tol: f64) -> Mat<f64> {
    let (rows, cols) = (a.nrows(), a.ncols());
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    if rows == 0 {
        return Mat::identity(cols, cols);
    }
    let qr = a.transpose().to_owned().col_piv_qr();
    let r = qr.compute_r();
    let diag = r.nrows().min(r.ncols());
    let top = if diag > 0 { libm::fabs(r[(0, 0)]) } else { 0.0 };
    let keep = (0..diag).filter(|&i| libm::fabs(r[(i, i)]) > rel_tol * top).count();
    let q = qr.compute_q();
    Mat::from_fn(cols, cols - keep, |i, j| q[(i, keep + j)])
}

/// 2-norm condition number.
pub fn condition_number(a: MatRef<'_, f64>) -> f64 {
    let s = a.singular_values();
    let (hi, lo) = (s[0], s[s.len() - 1]);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Inverse of a square matrix, failing if it is numerically singular.
pub fn inverse(a: MatRef<'_, f64>) -> Result<Mat<f64>> {
    if condition_number(a) > 1e14 {
        return Err(Error::Factorization("matrix is numerically singular"));
    }
    Ok(a.partial_piv_lu().inverse())
}

/// Smallest `k` eigenpairs of the symmetric-definite pencil `(k_mat, m_mat)`
/// by Cholesky reduction to a standard symmetric problem. Eigenvectors are
/// `M`-orthonormal.
pub fn generalized_sym_eig(
    k_mat: MatRef<'_, f64>,
    m_mat: MatRef<'_, f64>,
    k: usize,
) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = k_mat.nrows();
    let chol = m_mat
        .cholesky(Side::Lower)
        .map_err(|_| Error::Factorization("mass matrix is not positive definite"))?;
    let l = chol.compute_l();
    // C = L⁻¹ K L⁻ᵀ
    let mut c = k_mat.to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        c.as_mut(),
        faer::Parallelism::None,
    );
    let mut ct = c.transpose().to_owned();
    faer::linalg::triangular_solve::solve_lower_triangular_in_place(
        l.as_ref(),
        ct.as_mut(),
        faer::Parallelism::None,
    );
    let sym = Mat::from_fn(n, n, |i, j| 0.5 * (ct[(i, j)] + ct[(j, i)]));
    let eig = sym.selfadjoint_eigendecomposition(Side::Lower);
    let s = eig.s().column_vector();
    let values: Vec<f64> = (0..k).map(|i| s[i]).collect();
    let mut y = Mat::from_fn(n, k, |i, j| eig.u()[(i, j)]);
    faer::linalg::triangular_solve::solve_upper_triangular_in_place(
        l.transpose(),
        y.as_mut(),
        faer::Parallelism::None,
    );
    Ok((values, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_nullspace_of_a_rank_two_matrix() {
        let a = from_row_major(3, 4, &[1.0, 2.0, 3.0, 4.0, 2.0, 4.0, 6.0, 8.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(rank(a.as_ref(), 1e-9), 2);
        let z = nullspace(a.as_ref(), 1e-9);
        assert_eq!(z.ncols(), 2);
        let r = &a * &z;
        assert!(r.norm_max() < 1e-12);
    }

    #[test]
    fn nullspace_with_repeated_rows_and_zero_columns() {
        // Duplicated clamp rows and an alternating chain.
        let mut a = Mat::<f64>::zeros(17, 12);
        for k in 0..6 {
            a[(2 * k, 2 * k)] = 6.0;
            a[(2 * k + 1, 2 * k)] = -6.0;
        }
        for k in 0..5 {
            a[(12 + k, 2 * k + 1)] = 6.0;
            a[(12 + k, 2 * k + 3)] = 6.0;
        }
        let z = nullspace(a.as_ref(), 1e-9);
        assert_eq!(z.ncols(), 1);
        assert!((&a * &z).norm_max() < 1e-12);
        let s = a.singular_values();
        let top = 6.0 * libm::sqrt(2.0 + 2.0 * libm::cos(core::f64::consts::PI / 6.0));
        assert!(s[11].abs() < 1e-12 && (s[0] - top).abs() < 1e-12);
    }

    #[test]
    fn generalized_eig_of_diagonal_pencil() {
        let k = from_row_major(2, 2, &[6.0, 0.0, 0.0, 2.0]);
        let m = from_row_major(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let (vals, vecs) = generalized_sym_eig(k.as_ref(), m.as_ref(), 2).unwrap();
        assert!((vals[0] - 2.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let g = vecs.transpose() * &m * &vecs;
        assert!((g - Mat::<f64>::identity(2, 2)).norm_max() < 1e-14);
    }

    #[test]
    fn inverse_rejects_singular() {
        let a = from_row_major(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(inverse(a.as_ref()).is_err());
    }
}
