//! Thin helpers over nalgebra for complex Hermitian work: symmetrization,
//! eigenvalue checks, and Cholesky-backed log-determinants that double as
//! positive-definiteness certificates.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{DoaError, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// (X + Xᴴ)/2. Applied after assembling any theoretically-Hermitian matrix
/// so floating-point drift never reaches the eigenvalue checks.
pub fn hermitianize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = 1.0 + m.norm();
    (m - m.adjoint()).norm() <= tol * scale
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> DVector<f64> {
    let mut vals: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    DVector::from_vec(vals)
}

/// Eigendecomposition of a Hermitian matrix: (eigenvalues, eigenvectors),
/// unordered but mutually consistent (column k pairs with eigenvalue k).
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}

/// Largest |eigenvalue| of a Hermitian matrix (its spectral norm).
pub fn spectral_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// PSD within `tol` relative to the spectral norm: every eigenvalue must be
/// at least -tol * max(1, ||m||).
pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    let vals = hermitian_eigenvalues(m);
    let scale = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    vals.iter().all(|&v| v >= -tol * scale)
}

/// Hermitian L·Lᴴ factorization that certifies positive definiteness.
///
/// nalgebra's `Cholesky` cannot play this role for complex matrices: complex
/// square roots always exist, so it happily factors indefinite input. Here a
/// non-positive pivot is a hard error.
pub struct PdFactor {
    l: CMatrix,
}

impl PdFactor {
    pub fn new(m: &CMatrix, context: &str) -> Result<Self> {
        if !m.is_square() {
            return Err(DoaError::invalid(format!("{context}: matrix is not square")));
        }
        let n = m.nrows();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(DoaError::singular(format!(
                    "{context}: non-positive pivot at column {j} (not positive definite)"
                )));
            }
            let pivot = d.sqrt();
            l[(j, j)] = C64::new(pivot, 0.0);
            for i in (j + 1)..n {
                let mut s = m[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / pivot;
            }
        }
        Ok(PdFactor { l })
    }

    /// log|M| via the factor diagonal; real because M is Hermitian PD.
    pub fn log_det(&self) -> f64 {
        (0..self.l.nrows()).map(|j| 2.0 * self.l[(j, j)].re.ln()).sum()
    }

    /// Solves M X = RHS by forward and back substitution.
    pub fn solve(&self, rhs: &CMatrix) -> CMatrix {
        let n = self.l.nrows();
        debug_assert_eq!(rhs.nrows(), n);
        let mut x = rhs.clone();
        for c in 0..x.ncols() {
            // L y = rhs
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.l[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)].re;
            }
            // Lᴴ x = y
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in (i + 1)..n {
                    s -= self.l[(k, i)].conj() * x[(k, c)];
                }
                x[(i, c)] = s / self.l[(i, i)].re;
            }
        }
        x
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.l.nrows(), self.l.ncols()))
    }

    /// Cheap condition estimate from the factor diagonal, (max/min)^2.
    /// Within a factor of the matrix dimension of the true spectral
    /// condition number; good enough for singularity thresholds.
    pub fn condition_estimate(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 0..self.l.nrows() {
            let d = self.l[(j, j)].re;
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (hi / lo).powi(2)
    }
}

/// λmax/λmin of a Hermitian PD matrix; +inf when λmin ≤ 0.
pub fn condition_number(m: &CMatrix) -> f64 {
    let vals = hermitian_eigenvalues(m);
    let min = vals[0];
    let max = vals[vals.len() - 1];
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// trace of a product of two square matrices without forming it.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_hermitian() -> CMatrix {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.3, -0.4),
                C64::new(0.3, 0.4),
                C64::new(1.5, 0.0),
            ],
        );
        hermitianize(&m)
    }

    #[test]
    fn hermitianize_is_idempotent_and_hermitian() {
        let m = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, (i as f64) - (j as f64)));
        let h = hermitianize(&m);
        assert!(is_hermitian(&h, 1e-14));
        assert_relative_eq!((hermitianize(&h) - &h).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn logdet_matches_eigenvalue_product() {
        let m = sample_hermitian();
        let f = PdFactor::new(&m, "test").unwrap();
        let eig_logdet: f64 = hermitian_eigenvalues(&m).iter().map(|v| v.ln()).sum();
        assert_relative_eq!(f.log_det(), eig_logdet, max_relative = 1e-12);
    }

    #[test]
    fn cholesky_solve_inverts() {
        let m = sample_hermitian();
        let f = PdFactor::new(&m, "test").unwrap();
        let id = CMatrix::identity(2, 2);
        let inv = f.solve(&id);
        assert_relative_eq!((&m * &inv - &id).norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!((f.inverse() - inv).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut m = sample_hermitian();
        m[(0, 0)] = C64::new(-5.0, 0.0);
        assert!(PdFactor::new(&m, "test").is_err());
        assert!(!is_psd(&m, 1e-10));
    }

    #[test]
    fn trace_of_product_matches_full_product() {
        let a = CMatrix::from_fn(3, 3, |i, j| C64::new(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new(j as f64 - 0.25, i as f64));
        let direct = (&a * &b).trace();
        let fast = trace_of_product(&a, &b);
        assert_relative_eq!(direct.re, fast.re, epsilon = 1e-12);
        assert_relative_eq!(direct.im, fast.im, epsilon = 1e-12);
    }
}
