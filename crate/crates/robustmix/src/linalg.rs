//! Small shared helpers for symmetric-matrix calculus.
//!
//! Square roots and inverses of covariance-like matrices go through a
//! symmetric eigendecomposition with an eigenvalue floor, so that nearly
//! degenerate inputs are clamped (with a warning) instead of crashing.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Eigenvalue floor applied before inverting or taking square roots.
pub const EIGEN_FLOOR: f64 = 1e-12;

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Force exact symmetry: (M + Mᵀ)/2.
pub fn symmetrize_matrix(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = symmetrize_matrix(m).symmetric_eigen();
    eig.eigenvalues.min()
}

/// Apply `f` to the eigenvalues of a symmetric matrix, flooring them first.
///
/// Eigenvalues below [`EIGEN_FLOOR`] are clamped and a warning is logged;
/// callers that cannot tolerate clamping must check PSD-ness beforehand.
fn eigen_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = symmetrize_matrix(m).symmetric_eigen();
    let mut clamped = 0usize;
    let vals: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| {
            if l < EIGEN_FLOOR {
                clamped += 1;
                f(EIGEN_FLOOR)
            } else {
                f(l)
            }
        })
        .collect();
    if clamped > 0 {
        log::warn!(
            "eigen_map: clamped {clamped} eigenvalue(s) below {EIGEN_FLOOR:e} before mapping"
        );
    }
    let d = DMatrix::from_diagonal(&DVector::from_vec(vals));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Symmetric PSD square root, with eigenvalue flooring.
pub fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    eigen_map(m, f64::sqrt)
}

/// Symmetric PSD inverse square root, with eigenvalue flooring.
pub fn psd_inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    eigen_map(m, |l| 1.0 / l.sqrt())
}

/// Inverse and log-determinant of a symmetric positive definite matrix.
///
/// Fails with [`Error::SingularModel`] when the smallest eigenvalue is at or
/// below the floor, since the density of such a Gaussian is not finite.
pub fn pd_inverse_logdet(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let eig = symmetrize_matrix(m).symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min <= EIGEN_FLOOR {
        return Err(Error::SingularModel(format!(
            "covariance has eigenvalue {min:.3e} at or below floor {EIGEN_FLOOR:e}"
        )));
    }
    let logdet = eig.eigenvalues.iter().map(|l| l.ln()).sum();
    let inv_vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| 1.0 / l).collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(inv_vals));
    let inv = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok((inv, logdet))
}

/// Deterministic unit-norm start vector for power iterations.
///
/// SplitMix64 stream keyed by a fixed constant so results do not depend on
/// the data layout; effectively random, hence essentially never orthogonal
/// to the dominant eigenspace.
pub fn deterministic_unit_vector(len: usize) -> DVector<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut v = DVector::zeros(len);
    for i in 0..len {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        // map to (-1, 1)
        v[i] = 2.0 * ((z >> 11) as f64 / (1u64 << 53) as f64) - 1.0;
    }
    let n = v.norm();
    if n > 0.0 {
        v /= n;
    } else {
        v[0] = 1.0;
    }
    v
}
