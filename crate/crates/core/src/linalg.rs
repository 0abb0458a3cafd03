//! Shared dense linear algebra built on nalgebra: regularized least
//! squares, positive-semidefinite square roots and matrix exponentials.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::num::Real;

/// Relative singular-value cutoff for the pseudoinverse (relative to the
/// largest singular value).
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Eigenvalues of a symmetric matrix above this floor are treated as
/// nonnegative; anything below it makes the matrix indefinite.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Relative residual tolerance for the factorization `σσᵀ = a`.
pub const PSD_FACTOR_RESIDUAL: f64 = 1e-8;

/// Right factor `G` of the least-squares solution `M = D · G` of
/// `min_M ‖D − M Ψ‖_F`, shared between the plain estimate and the
/// propagation of per-sample standard errors.
///
/// * `ridge == 0`: `G = Ψ⁺` via an SVD with relative cutoff
///   [`PINV_RELATIVE_CUTOFF`].
/// * `ridge > 0`: `G = Ψᵀ (Ψ Ψᵀ + ridge·I)⁻¹` (Tikhonov).
pub fn least_squares_design<T: Real>(psi: &DMatrix<T>, ridge: T) -> Result<DMatrix<T>> {
    if ridge < T::zero() {
        return Err(Error::Config(format!(
            "ridge parameter must be nonnegative, got {}",
            ridge.as_f64()
        )));
    }
    let max_abs = psi.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    if max_abs == T::zero() {
        return Err(Error::DegenerateData(
            "observable matrix is identically zero".into(),
        ));
    }
    if ridge > T::zero() {
        let rows = psi.nrows();
        let mut gram = psi * psi.transpose();
        for k in 0..rows {
            gram[(k, k)] += ridge;
        }
        let chol = nalgebra::Cholesky::new(gram).ok_or_else(|| {
            Error::DegenerateData("ridge-regularized Gram matrix is not positive definite".into())
        })?;
        // G = Ψᵀ (Ψ Ψᵀ + λI)⁻¹; solve (Ψ Ψᵀ + λI) X = Ψ, then G = Xᵀ.
        let x = chol.solve(psi);
        Ok(x.transpose())
    } else {
        pseudo_inverse(psi, T::of(PINV_RELATIVE_CUTOFF))
    }
}

/// Moore–Penrose pseudoinverse with a cutoff relative to the largest
/// singular value.
pub fn pseudo_inverse<T: Real>(a: &DMatrix<T>, relative_cutoff: T) -> Result<DMatrix<T>> {
    let svd = a.clone().svd(true, true);
    let u = svd
        .u
        .as_ref()
        .ok_or_else(|| Error::DegenerateData("SVD did not produce U".into()))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::DegenerateData("SVD did not produce Vᵀ".into()))?;
    let sigma_max = svd
        .singular_values
        .iter()
        .fold(T::zero(), |m, &s| m.max(s));
    let cutoff = sigma_max * relative_cutoff;
    // A⁺ = V Σ⁺ Uᵀ
    let mut inv_sigma_ut = u.transpose();
    for (k, mut row) in inv_sigma_ut.row_iter_mut().enumerate() {
        let s = svd.singular_values[k];
        let inv = if s > cutoff { T::one() / s } else { T::zero() };
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
    Ok(v_t.transpose() * inv_sigma_ut)
}

/// Maximum absolute asymmetry `max_ij |a_ij − a_ji|`.
pub fn max_asymmetry<T: Real>(a: &DMatrix<T>) -> T {
    let n = a.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Validates that `a` is square and symmetric within `tol`.
pub fn check_symmetric<T: Real>(a: &DMatrix<T>, tol: T) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    let asym = max_asymmetry(a);
    if asym > tol {
        return Err(Error::NonSymmetricDiffusion {
            asymmetry: asym.as_f64(),
        });
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue<T: Real>(a: &DMatrix<T>) -> T {
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    eig.eigenvalues.iter().fold(T::pos_infinity(), |m, &v| m.min(v))
}

/// Lower-triangular factor `σ` with `σσᵀ = a` for a symmetric positive
/// semidefinite `a`.
///
/// Eigenvalues in `[EIGENVALUE_FLOOR, 0)` are clamped to zero before a
/// column-zeroing semidefinite Cholesky; an eigenvalue below the floor is
/// an [`Error::IndefiniteDiffusion`]. The factor residual is verified
/// against [`PSD_FACTOR_RESIDUAL`].
pub fn psd_sqrt_lower<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    check_symmetric(a, T::of(1e-12).max(T::of(1e-14) * matrix_scale(a)))?;
    let n = a.nrows();
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let mut min_eig = T::pos_infinity();
    for &v in eig.eigenvalues.iter() {
        min_eig = min_eig.min(v);
    }
    if min_eig < T::of(EIGENVALUE_FLOOR) {
        return Err(Error::IndefiniteDiffusion {
            min_eigenvalue: min_eig.as_f64(),
        });
    }
    // Clamp the tiny negative eigenvalues, if any, and refactor.
    let work = if min_eig < T::zero() {
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
    } else {
        a.clone()
    };

    let mut l = DMatrix::<T>::zeros(n, n);
    let diag_tol = T::of(1e-14) * matrix_scale(&work);
    for j in 0..n {
        let mut d = work[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= diag_tol {
            // Semidefinite direction: leave the column at zero.
            continue;
        }
        let root = d.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..n {
            let mut s = work[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / root;
        }
    }

    let residual = (&l * l.transpose() - a).norm();
    let allowed = T::of(PSD_FACTOR_RESIDUAL) * T::one().max(a.norm());
    if residual > allowed {
        return Err(Error::DegenerateData(format!(
            "PSD factorization residual {} exceeds {}",
            residual.as_f64(),
            allowed.as_f64()
        )));
    }
    Ok(l)
}

fn matrix_scale<T: Real>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::one(), |m, &v| m.max(v.abs()))
}

/// Matrix exponential `exp(a)` (scaling-and-squaring Padé approximation).
pub fn expm<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    a.exp()
}

/// Largest real part among the eigenvalues of `a`.
pub fn spectral_abscissa<T: Real>(a: &DMatrix<T>) -> T {
    a.complex_eigenvalues()
        .iter()
        .fold(T::of(f64::NEG_INFINITY), |m, v| m.max(v.re))
}

/// Frobenius norm of the difference of two matrices.
pub fn frobenius_distance<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    (a - b).norm()
}

/// Convenience: builds a column vector from a slice.
pub fn column<T: Real>(values: &[T]) -> DVector<T> {
    DVector::from_column_slice(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pseudo_inverse_recovers_square_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
        let pinv = pseudo_inverse(&a, 1e-12).unwrap();
        let id = &a * &pinv;
        assert_relative_eq!(id[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(id[(1, 1)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(id[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pseudo_inverse_drops_tiny_singular_values() {
        // Rank-one matrix: pinv must not blow up.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let pinv = pseudo_inverse(&a, 1e-12).unwrap();
        // A⁺ = A / 4 for this matrix.
        for v in pinv.iter() {
            assert_relative_eq!(*v, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn psd_sqrt_matches_hand_cholesky() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 2.0]);
        let l = psd_sqrt_lower(&a).unwrap();
        assert_relative_eq!(l[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(l[(1, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(l[(1, 1)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(l[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_sqrt_handles_zero_and_semidefinite() {
        let zero = DMatrix::<f64>::zeros(3, 3);
        let l = psd_sqrt_lower(&zero).unwrap();
        assert!(l.iter().all(|&v| v == 0.0));

        // Rank-one PSD matrix with an exactly zero eigenvalue.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let l = psd_sqrt_lower(&a).unwrap();
        let res = (&l * l.transpose() - &a).norm();
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn psd_sqrt_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-6]);
        match psd_sqrt_lower(&a) {
            Err(crate::error::Error::IndefiniteDiffusion { .. }) => {}
            other => panic!("expected indefinite-diffusion error, got {other:?}"),
        }
    }

    #[test]
    fn psd_sqrt_clamps_roundoff_negatives() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1e-12]);
        let l = psd_sqrt_lower(&a).unwrap();
        assert_eq!(l[(1, 1)], 0.0);
    }

    #[test]
    fn expm_of_diagonal_is_elementwise_exp() {
        let a = DMatrix::from_row_slice(2, 2, &[-1.4, 0.0, 0.0, 0.5]);
        let e = expm(&a);
        assert_relative_eq!(e[(0, 0)], (-1.4f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(e[(1, 1)], 0.5f64.exp(), epsilon = 1e-12);
    }

    #[test]
    fn spectral_abscissa_of_rotation_plus_decay() {
        // Eigenvalues -0.5 ± i.
        let a = DMatrix::from_row_slice(2, 2, &[-0.5, -1.0, 1.0, -0.5]);
        assert_relative_eq!(spectral_abscissa(&a), -0.5, epsilon = 1e-10);
    }

    #[test]
    fn generic_scalar_f32_compiles_and_runs() {
        let a = DMatrix::<f32>::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 2.0]);
        let l = psd_sqrt_lower(&a).unwrap();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-5);
    }
}
