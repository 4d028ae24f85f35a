//! Small dense kernels: the exponential dot-product transform, the Gaussian
//! kernel and the inverse square root of a PSD matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric: |M - M^T| reaches {0:e}")]
    NotSymmetric(f64),
}

/// Asymmetry tolerated by [`inv_sqrt_psd`].
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Eigenvalues below this are clamped before inversion.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// `exp(alpha * x - alpha * l)`.
#[inline]
pub fn sigma(x: f64, alpha: f64, l: f64) -> f64 {
    (alpha * x - alpha * l).exp()
}

pub fn sigma_matrix(m: &DMatrix<f64>, alpha: f64, l: f64) -> DMatrix<f64> {
    m.map(|x| sigma(x, alpha, l))
}

/// `exp(-alpha / 2 * |x - y|^2)`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], alpha: f64) -> Result<f64, LinalgError> {
    if x.len() != y.len() {
        return Err(LinalgError::DimensionMismatch(x.len(), y.len()));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-0.5 * alpha * d2).exp())
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn squared_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `(M + eps I)^{-1/2}` through a symmetric eigendecomposition, eigenvalues
/// floored at [`EIGEN_FLOOR`]. The result is exactly symmetric.
pub fn inv_sqrt_psd(m: &DMatrix<f64>, epsilon: f64) -> Result<DMatrix<f64>, LinalgError> {
    let (r, c) = m.shape();
    if r != c {
        return Err(LinalgError::NotSquare(r, c));
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > SYMMETRY_TOL {
        return Err(LinalgError::NotSymmetric(asym));
    }
    let mut shifted = (m + m.transpose()) * 0.5;
    for i in 0..r {
        shifted[(i, i)] += epsilon;
    }
    let eig = SymmetricEigen::new(shifted);
    let scale = DVector::from_iterator(
        r,
        eig.eigenvalues.iter().map(|&l| 1.0 / l.max(EIGEN_FLOOR).sqrt()),
    );
    let v = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(r, r, |i, j| v[(i, j)] * scale[j]);
    let out = &scaled * v.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(4.0, 1.5, 4.0), 1.0);
        assert_abs_diff_eq!(sigma(3.0, 1.5, 4.0), 0.223_130_160_148_429_8, epsilon = 1e-12);
        assert!(sigma(2.0, 1.5, 4.0) < sigma(2.5, 1.5, 4.0));
    }

    #[test]
    fn gaussian_values() {
        let x = [1.0, 0.0, 0.0, 1.0];
        let y = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(gaussian_kernel(&x, &x, 1.5).unwrap(), 1.0);
        assert_abs_diff_eq!(gaussian_kernel(&x, &y, 1.5).unwrap(), (-1.5f64).exp(), epsilon = 1e-15);
        assert_eq!(
            gaussian_kernel(&x, &[1.0], 1.5),
            Err(LinalgError::DimensionMismatch(4, 1))
        );
    }

    #[test]
    fn inv_sqrt_identity_and_diag() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert_abs_diff_eq!(inv_sqrt_psd(&i, 0.0).unwrap(), i, epsilon = 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = inv_sqrt_psd(&d, 0.0).unwrap();
        assert_abs_diff_eq!(r[(0, 0)], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r[(1, 1)], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(inv_sqrt_psd(&m, 0.0), Err(LinalgError::NotSymmetric(_))));
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert_eq!(inv_sqrt_psd(&rect, 0.0), Err(LinalgError::NotSquare(2, 3)));
    }

    #[test]
    fn inv_sqrt_squares_to_inverse() {
        // B^T B + I, fixed entries
        let b = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0);
        let m = b.transpose() * &b + DMatrix::identity(5, 5);
        let r = inv_sqrt_psd(&m, 1e-7).unwrap();
        let mut shifted = m.clone();
        for i in 0..5 {
            shifted[(i, i)] += 1e-7;
        }
        let check = &r * &r * &shifted;
        assert_abs_diff_eq!(check, DMatrix::identity(5, 5), epsilon = 1e-9);
        assert_eq!(r, r.transpose());
    }

    #[test]
    fn floor_keeps_singular_finite() {
        let ones = DMatrix::from_element(3, 3, 1.0);
        let r = inv_sqrt_psd(&ones, 0.0).unwrap();
        assert!(r.iter().all(|x| x.is_finite()));
    }
}
