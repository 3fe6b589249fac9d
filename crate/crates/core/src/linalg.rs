//! Dense linear-algebra helpers used across the crate.
//!
//! Complex matrices are handled through the real embedding
//! `A = X + iY  ↦  [[X, -Y], [Y, X]]`, which preserves singular values
//! (each with doubled multiplicity) and the spectrum of Hermitian
//! matrices. This keeps every rank and eigenvalue decision on the
//! well-trodden real SVD / symmetric-eigen paths.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative singular-value threshold for rank decisions.
pub const RANK_REL_TOL: f64 = 1e-8;

/// Real embedding of a complex matrix: `[[Re, -Im], [Im, Re]]`.
pub fn realify(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let (r, c) = a.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for i in 0..r {
        for j in 0..c {
            let z = a[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + c)] = -z.im;
            out[(i + r, j)] = z.im;
            out[(i + r, j + c)] = z.re;
        }
    }
    out
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<Complex64>) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let re = realify(a);
    re.singular_values().max()
}

/// Smallest eigenvalue of a Hermitian matrix.
///
/// The input is symmetrized first so that accumulated rounding in the
/// caller cannot push the matrix off the Hermitian subspace.
pub fn min_hermitian_eigenvalue(a: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "expected a square matrix");
    if a.nrows() == 0 {
        return 0.0;
    }
    let herm = (a + a.adjoint()).scale(0.5);
    let re = realify(&herm);
    let sym = (&re + re.transpose()).scale(0.5);
    let eig = sym.symmetric_eigenvalues();
    eig.min()
}

/// Numerical rank of a real matrix, singular values below
/// `rel_tol * sigma_max` counting as zero.
pub fn rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Numerical rank of a complex matrix (via the real embedding, which
/// exactly doubles the rank).
pub fn complex_rank(a: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let r = rank(&realify(a), rel_tol);
    // The embedding has even rank; an odd count means a singular value
    // sits right on the threshold, which we round down.
    r / 2
}

/// Orthonormal basis for the kernel of a real matrix, returned as the
/// columns of an `ncols x nullity` matrix.
pub fn kernel_basis(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    if a.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let svd = a.clone().svd(false, true);
    let sv = &svd.singular_values;
    let max = sv.max();
    let r = if max == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > rel_tol * max).count()
    };
    let v_t = svd.v_t.expect("SVD with V requested");
    // Rows 0..r of V^T span the row space; complete them to an
    // orthonormal basis of R^n by modified Gram-Schmidt over the
    // standard basis.
    let mut basis: Vec<DVector<f64>> = (0..r).map(|i| v_t.row(i).transpose()).collect();
    let mut kernel: Vec<DVector<f64>> = Vec::with_capacity(n - r);
    for j in 0..n {
        if basis.len() + 0 == n {
            break;
        }
        let mut w = DVector::zeros(n);
        w[j] = 1.0;
        for b in &basis {
            let proj = b.dot(&w);
            w -= b * proj;
        }
        // Re-orthogonalize once for numerical safety.
        for b in &basis {
            let proj = b.dot(&w);
            w -= b * proj;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            w /= norm;
            basis.push(w.clone());
            kernel.push(w);
        }
    }
    assert_eq!(
        kernel.len(),
        n - r,
        "kernel completion found {} vectors, expected {}",
        kernel.len(),
        n - r
    );
    if kernel.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    DMatrix::from_columns(&kernel)
}

/// Moore-Penrose pseudo-inverse with the crate-wide rank threshold.
pub fn pinv(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DMatrix::zeros(a.ncols(), a.nrows());
    }
    let max = a.singular_values().max();
    let eps = if max == 0.0 { rel_tol } else { rel_tol * max };
    a.clone()
        .pseudo_inverse(eps)
        .expect("pseudo-inverse of a finite matrix")
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> DVector<f64> {
    &pinv(a, rel_tol) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn operator_norm_of_unitary_is_one() {
        // [[0, i], [i, 0]] is unitary.
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert_relative_eq!(operator_norm(&a), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_norm_scales() {
        let a = DMatrix::from_row_slice(1, 1, &[c(3.0, 4.0)]);
        assert_relative_eq!(operator_norm(&a), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn hermitian_min_eigenvalue() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let a = DMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        assert_relative_eq!(min_hermitian_eigenvalue(&a), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        // Row (1, 1, 0): kernel is 2-dimensional, orthogonal to (1,1,0).
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = kernel_basis(&a, RANK_REL_TOL);
        assert_eq!(k.shape(), (3, 2));
        let residual = &a * &k;
        assert!(residual.amax() < 1e-12);
        let gram = k.transpose() * &k;
        assert!((gram - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn kernel_of_full_rank_is_empty() {
        let a = DMatrix::identity(3, 3);
        let k = kernel_basis(&a, RANK_REL_TOL);
        assert_eq!(k.ncols(), 0);
    }

    #[test]
    fn complex_rank_counts_over_c() {
        // Rank-1 complex matrix: (1, i) ⊗ (1, -i).
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert_eq!(complex_rank(&a, RANK_REL_TOL), 1);
    }

    #[test]
    fn lstsq_minimum_norm() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_row_slice(&[2.0]);
        let x = lstsq(&a, &b, RANK_REL_TOL);
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
    }
}
