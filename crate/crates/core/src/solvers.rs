//! Riccati, Lyapunov and invariant-subspace routines.
//!
//! Everything here is desk scale: matrices of order at most a few dozen,
//! stored dense.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{
    self, check_shape, check_square, eigenvalues, inverse, kron, rcond, spectral_radius,
    symmetrize, Mat,
};

/// Relative tolerance for calling an eigenvalue "on the imaginary axis".
pub const IMAG_AXIS_TOL: f64 = 1e-8;

/// Reciprocal condition number below which a block is treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-12;

/// Default number of integration steps per horizon for
/// [`integrate_covariance`].
pub const DEFAULT_STEPS: usize = 20_000;

/// Steady-state Kalman filter for `dx = A x dt + (noise)`, `dy = C x dt + (noise)`
/// with joint noise intensity `[[V1, V12], [V12ᵀ, V2]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanDesign {
    pub q: Mat,
    pub k: Mat,
    pub v1: Mat,
    pub v12: Mat,
    pub v2: Mat,
    pub residual_norm: f64,
}

/// Residual of the filter Riccati equation
/// `(A - V12 V2⁻¹ C) Q + Q (·)ᵀ - Q Cᵀ V2⁻¹ C Q + V1 - V12 V2⁻¹ V12ᵀ`.
pub fn care_residual(a: &Mat, c: &Mat, v1: &Mat, v12: &Mat, v2: &Mat, q: &Mat) -> Result<Mat> {
    let v2_inv = inverse(v2)?;
    let a_t = a - v12 * &v2_inv * c;
    let g = v1 - v12 * &v2_inv * v12.transpose();
    let r = c.transpose() * &v2_inv * c;
    Ok(&a_t * q + q * a_t.transpose() - q * r * q + g)
}

/// Stabilizing solution of the filter Riccati equation and the gain
/// `K = (Q Cᵀ + V12) V2⁻¹`.
///
/// Works on the Hamiltonian `[[Ãᵀ, -Cᵀ V2⁻¹ C], [-G, -Ã]]`: the stable
/// invariant subspace `[X1; X2]` gives `Q = X2 X1⁻¹`.
pub fn solve_care(a: &Mat, c: &Mat, v1: &Mat, v12: &Mat, v2: &Mat) -> Result<KalmanDesign> {
    let n = a.nrows();
    let m = c.nrows();
    check_square("A", a, n)?;
    check_shape("C", c, m, n)?;
    check_square("V1", v1, n)?;
    check_shape("V12", v12, n, m)?;
    check_square("V2", v2, m)?;
    if v2.clone().cholesky().is_none() {
        return Err(Error::Domain("V2 must be symmetric positive definite"));
    }

    let v2_inv = inverse(v2)?;
    let a_t = a - v12 * &v2_inv * c;
    let g = symmetrize(&(v1 - v12 * &v2_inv * v12.transpose()));
    let r = symmetrize(&(c.transpose() * &v2_inv * c));

    let mut h = Mat::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(&a_t.transpose());
    h.view_mut((0, n), (n, n)).copy_from(&(-&r));
    h.view_mut((n, 0), (n, n)).copy_from(&(-&g));
    h.view_mut((n, n), (n, n)).copy_from(&(-&a_t));

    let (x1, x2) = stable_subspace(&h).map_err(|e| match e {
        Error::ImaginaryAxisEigenvalue { .. } => {
            Error::NoStabilizingSolution("Hamiltonian has imaginary-axis eigenvalues")
        }
        Error::WrongSplitCount { .. } => {
            Error::NoStabilizingSolution("stable subspace has the wrong dimension")
        }
        other => other,
    })?;
    if rcond(&x1) < SINGULAR_RCOND {
        return Err(Error::NoStabilizingSolution("X1 is singular"));
    }
    // Q X1 = X2  <=>  X1ᵀ Qᵀ = X2ᵀ
    let qt = x1
        .transpose()
        .lu()
        .solve(&x2.transpose())
        .ok_or(Error::NoStabilizingSolution("X1 is singular"))?;
    let mut q = symmetrize(&qt.transpose());

    // Newton corrections on the closed-loop Lyapunov equation until the
    // residual reaches round-off or stops shrinking.
    let mut res_norm = care_residual(a, c, v1, v12, v2, &q)?.norm();
    for _ in 0..8 {
        if res_norm <= 1e-14 * (1.0 + q.norm()) {
            break;
        }
        let res = care_residual(a, c, v1, v12, v2, &q)?;
        let closed = &a_t - &q * &r;
        let Ok(dq) = solve_lyapunov(&closed, &res) else {
            break;
        };
        let refined = symmetrize(&(&q + dq));
        let refined_norm = care_residual(a, c, v1, v12, v2, &refined)?.norm();
        let stays_stable = linalg::is_hurwitz(&(&a_t - &refined * &r));
        if refined_norm >= res_norm || !stays_stable {
            break;
        }
        q = refined;
        res_norm = refined_norm;
    }

    let k = (&q * c.transpose() + v12) * &v2_inv;
    let a_cl = a - &k * c;
    if !linalg::is_hurwitz(&a_cl) {
        return Err(Error::NoStabilizingSolution("A - KC is not Hurwitz"));
    }
    let residual_norm = care_residual(a, c, v1, v12, v2, &q)?.norm();
    Ok(KalmanDesign {
        q,
        k,
        v1: v1.clone(),
        v12: v12.clone(),
        v2: v2.clone(),
        residual_norm,
    })
}

/// Solves `A_e P + P A_eᵀ + N = 0` for Hurwitz `A_e` by a direct solve of
/// the vectorized system `(I ⊗ A_e + A_e ⊗ I) vec(P) = -vec(N)`.
pub fn solve_lyapunov(a_e: &Mat, n: &Mat) -> Result<Mat> {
    let dim = a_e.nrows();
    check_square("A_e", a_e, dim)?;
    check_square("N", n, dim)?;
    let max_re = linalg::max_real_part(a_e);
    if max_re >= -1e-12 * (1.0 + spectral_radius(a_e)) {
        return Err(Error::NotHurwitz {
            max_real_part: max_re,
        });
    }
    let eye = Mat::identity(dim, dim);
    let op = kron(&eye, a_e) + kron(a_e, &eye);
    let rhs = -DVector::from_column_slice(n.as_slice());
    let vec_p = op.lu().solve(&rhs).ok_or(Error::NotHurwitz {
        max_real_part: max_re,
    })?;
    let p = Mat::from_column_slice(dim, dim, vec_p.as_slice());
    Ok(symmetrize(&p))
}

/// Integrates `dP/dt = A_e P + P A_eᵀ + N` from `p0` over `horizon` with
/// classical fixed-step RK4. The step is shrunk so it divides the horizon.
pub fn integrate_covariance(a_e: &Mat, n: &Mat, p0: &Mat, horizon: f64, step: f64) -> Mat {
    let steps = libm::ceil(horizon / step).max(1.0) as usize;
    let h = horizon / steps as f64;
    let at = a_e.transpose();
    let rhs = |p: &Mat| a_e * p + p * &at + n;
    let mut p = p0.clone();
    for _ in 0..steps {
        let k1 = rhs(&p);
        let k2 = rhs(&(&p + &k1 * (h / 2.0)));
        let k3 = rhs(&(&p + &k2 * (h / 2.0)));
        let k4 = rhs(&(&p + &k3 * h));
        p += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    p
}

/// Orthonormal basis `[X1; X2]` of the invariant subspace of `z` for
/// eigenvalues with negative real part.
///
/// `z` is `2n × 2n` and the subspace must have dimension exactly `n`.
/// The basis comes from the range of the spectral projector
/// `(I - sign(z)) / 2`, so repeated eigenvalues need no special care.
pub fn stable_subspace(z: &Mat) -> Result<(Mat, Mat)> {
    let dim = z.nrows();
    check_square("Z", z, dim)?;
    if !dim.is_multiple_of(2) {
        return Err(Error::Domain("Z must have even order"));
    }
    let n = dim / 2;
    let eig = eigenvalues(z);
    let radius = eig.iter().fold(0.0_f64, |a, l| a.max(l.norm()));
    let tol = IMAG_AXIS_TOL * (1.0 + radius);
    let min_re = eig.iter().fold(f64::INFINITY, |a, l| a.min(l.re.abs()));
    if min_re <= tol {
        return Err(Error::ImaginaryAxisEigenvalue { real_part: min_re });
    }
    let stable = eig.iter().filter(|l| l.re < 0.0).count();
    if stable != n {
        return Err(Error::WrongSplitCount {
            expected: n,
            found: stable,
        });
    }

    let sign = matrix_sign(z)?;
    let projector = (Mat::identity(dim, dim) - sign) * 0.5;
    // range(P) = range(P Pᵀ); the symmetric eigensolver is reliable on the
    // rank-deficient product where a direct SVD of P is not
    let gram = symmetrize(&(&projector * projector.transpose()));
    let eig = gram.symmetric_eigen();
    let mut order: alloc::vec::Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let basis = Mat::from_fn(dim, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let x1 = basis.rows(0, n).into_owned();
    let x2 = basis.rows(n, n).into_owned();
    Ok((x1, x2))
}

/// Matrix sign function by the scaled Newton iteration
/// `S ← (μS + (μS)⁻¹)/2` with determinant scaling.
fn matrix_sign(z: &Mat) -> Result<Mat> {
    let dim = z.nrows();
    let mut s = z.clone();
    let mut scaling = true;
    for _ in 0..100 {
        let inv = inverse(&s).map_err(|_| Error::ImaginaryAxisEigenvalue { real_part: 0.0 })?;
        let mu = if scaling {
            let det = s.determinant().abs();
            if det > 0.0 && det.is_finite() {
                libm::pow(det, -1.0 / dim as f64)
            } else {
                1.0
            }
        } else {
            1.0
        };
        let next = (&s * mu + inv * (1.0 / mu)) * 0.5;
        let change = (&next - &s).norm();
        let size = next.norm();
        s = next;
        if change <= 1e-2 * size {
            scaling = false;
        }
        if change <= 1e-14 * size {
            return Ok(s);
        }
    }
    // converged as far as round-off allows
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lyapunov_scalar_examples() {
        let a = Mat::identity(2, 2) * -0.1;
        let p = solve_lyapunov(&a, &(Mat::identity(2, 2) * 0.2)).unwrap();
        assert_relative_eq!(p, Mat::identity(2, 2), epsilon = 1e-14);
        let p = solve_lyapunov(&a, &(Mat::identity(2, 2) * 2.0)).unwrap();
        assert_relative_eq!(p, Mat::identity(2, 2) * 10.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_rejects_unstable() {
        let a = Mat::identity(2, 2) * 0.1;
        assert!(matches!(
            solve_lyapunov(&a, &Mat::identity(2, 2)),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn covariance_integration_reaches_analytic_value() {
        // p(t) = 1 - exp(-0.2 t)
        let a = Mat::identity(2, 2) * -0.1;
        let n = Mat::identity(2, 2) * 0.2;
        let p = integrate_covariance(&a, &n, &Mat::zeros(2, 2), 200.0, 200.0 / 20_000.0);
        let expected = 1.0 - (-0.2f64 * 200.0).exp();
        assert_relative_eq!(p, Mat::identity(2, 2) * expected, epsilon = 1e-12);
        assert_relative_eq!(p, Mat::identity(2, 2), epsilon = 1e-6);
    }

    #[test]
    fn covariance_fixed_point_and_decay() {
        let a = Mat::from_row_slice(2, 2, &[-0.3, 0.2, -0.1, -0.5]);
        let n = Mat::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]);
        let p = solve_lyapunov(&a, &n).unwrap();
        let q = integrate_covariance(&a, &n, &p, 10.0, 10.0 / 2000.0);
        assert_relative_eq!(p, q, epsilon = 1e-10);
        let decayed = integrate_covariance(&a, &Mat::zeros(2, 2), &p, 100.0, 0.01);
        assert!(decayed.norm() < 1e-6 * p.norm());
    }

    #[test]
    fn stable_subspace_of_diagonal() {
        let z = Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let (x1, x2) = stable_subspace(&z).unwrap();
        assert_relative_eq!(x1[(0, 0)].abs(), 1.0, epsilon = 1e-14);
        assert!(x2[(0, 0)].abs() < 1e-14);
    }

    #[test]
    fn stable_subspace_rejects_imaginary_axis() {
        let z = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert!(matches!(
            stable_subspace(&z),
            Err(Error::ImaginaryAxisEigenvalue { .. })
        ));
    }

    #[test]
    fn stable_subspace_rejects_bad_split() {
        let z = Mat::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        assert!(matches!(
            stable_subspace(&z),
            Err(Error::WrongSplitCount {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn stable_subspace_is_invariant() {
        let z = Mat::from_row_slice(
            4,
            4,
            &[
                -1.0, 2.0, 0.5, 0.0, //
                0.0, 3.0, 1.0, 0.2, //
                0.3, 0.0, -2.0, 1.0, //
                0.0, 0.1, 0.0, 4.0,
            ],
        );
        let (x1, x2) = stable_subspace(&z).unwrap();
        let mut x = Mat::zeros(4, 2);
        x.rows_mut(0, 2).copy_from(&x1);
        x.rows_mut(2, 2).copy_from(&x2);
        // Z X stays in span(X): residual of the projection vanishes
        let zx = &z * &x;
        let proj = &x * (x.transpose() * &zx);
        assert!((zx - proj).norm() < 1e-12);
        assert_relative_eq!(x.transpose() * &x, Mat::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn care_two_state_scalar_case() {
        // a = -1, c = 1, v1 = 1, v12 = 0, v2 = 1: q² + 2q - 1 = 0
        let a = Mat::identity(2, 2) * -1.0;
        let c = Mat::identity(2, 2);
        let d = solve_care(&a, &c, &c, &Mat::zeros(2, 2), &c).unwrap();
        let q = -1.0 + 2f64.sqrt();
        assert_relative_eq!(d.q, Mat::identity(2, 2) * q, epsilon = 1e-13);
        assert_relative_eq!(d.k, Mat::identity(2, 2) * q, epsilon = 1e-13);
    }

    #[test]
    fn care_rejects_indefinite_v2() {
        let a = Mat::identity(2, 2) * -1.0;
        let c = Mat::identity(2, 2);
        let r = solve_care(&a, &c, &c, &Mat::zeros(2, 2), &(-&c));
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
