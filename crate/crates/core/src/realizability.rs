//! Physical realizability of observer-form systems
//! `dξ = Â ξ dt + B̂ dy + B_v1 dv1 + B_v2 dv2`, `dη = Ĉ ξ dt + dv1`.
//!
//! Three tools live here: the rank of `S̃`, which is the minimal number of
//! extra vacuum quadratures, the explicit construction of `B_v1` and
//! `B_v2` that achieves it, and a state transformation that removes
//! `B_v2` entirely when a suitable skew Riccati solution exists.

use alloc::vec::Vec;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, check_shape, check_square, rcond, real_part_checked, CMat, Mat};
use crate::solvers::{stable_subspace, SINGULAR_RCOND};
use crate::system::{canonical_theta, gamma_matrix};

/// Relative singular-value cutoff for the numerical rank of `S̃`.
pub const RANK_TOL: f64 = 1e-9;

fn check_triple(a_hat: &Mat, b_hat: &Mat, c_hat: &Mat, theta: &Mat) -> Result<()> {
    let n = a_hat.nrows();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Domain(
            "observer state dimension must be even and positive",
        ));
    }
    check_square("A_hat", a_hat, n)?;
    check_square("theta", theta, n)?;
    if b_hat.nrows() != n || !b_hat.ncols().is_multiple_of(2) {
        return Err(Error::Domain(
            "B_hat must have n_x rows and an even column count",
        ));
    }
    if c_hat.ncols() != n || !c_hat.nrows().is_multiple_of(2) || c_hat.nrows() == 0 {
        return Err(Error::Domain(
            "C_hat must have n_x columns and an even row count",
        ));
    }
    Ok(())
}

/// `S̃ = ΘB̂ΘB̂ᵀΘ - ΘÂ - ÂᵀΘ - ĈᵀΘĈ`.
///
/// The inner commutation matrices are canonical of the input and output
/// dimension respectively. The result is returned exactly skew.
pub fn stilde(a_hat: &Mat, b_hat: &Mat, c_hat: &Mat, theta: &Mat) -> Mat {
    let theta_y = canonical_theta(b_hat.ncols() / 2);
    let theta_eta = canonical_theta(c_hat.nrows() / 2);
    let s = theta * b_hat * theta_y * b_hat.transpose() * theta
        - theta * a_hat
        - a_hat.transpose() * theta
        - c_hat.transpose() * theta_eta * c_hat;
    linalg::skew_part(&s)
}

/// Numerical rank of a skew matrix, counting singular values above
/// `RANK_TOL · σ_max`. Rounded up to even since skew spectra pair up.
pub fn min_vacuum_rank(s_tilde: &Mat) -> usize {
    if s_tilde.is_empty() {
        return 0;
    }
    let sv = s_tilde.clone().singular_values();
    let max = sv.iter().fold(0.0_f64, |a, &s| a.max(s));
    if max == 0.0 {
        return 0;
    }
    let r = sv.iter().filter(|&&s| s > RANK_TOL * max).count();
    r + r % 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentResult {
    pub s_tilde: Mat,
    pub n_v2: usize,
    pub b_v1: Mat,
    pub b_v2: Mat,
    /// Coupling-like factor behind `B_v2`, `(n_v2/2) × n_x`.
    pub w: CMat,
}

/// `diag(J)` of order `n` (n even).
fn diag_j(n: usize) -> Mat {
    canonical_theta(n / 2)
}

/// Rotates a unit eigenvector so its first non-negligible entry is real
/// and positive.
fn fix_phase(v: &mut DVector<Complex64>) {
    let scale = v.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-8 * scale).copied() {
        let rot = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= rot;
        }
    }
}

/// Chooses `B_v1 = ΘĈᵀdiag(J)` and a `B_v2` with the minimal number of
/// columns so the augmented observer preserves commutation relations.
///
/// `S = (i/4)S̃` is diagonalized as `U†DU` with eigenvalues in descending
/// order; `W = (|D| + D)^{1/2} U` keeps the rows of positive eigenvalues and
/// `B_v2 = 2iΘ[-W†  Wᵀ] P diag(M)`.
pub fn augment_noise(a_hat: &Mat, b_hat: &Mat, c_hat: &Mat, theta: &Mat) -> Result<AugmentResult> {
    check_triple(a_hat, b_hat, c_hat, theta)?;
    let n = a_hat.nrows();
    let s_tilde = stilde(a_hat, b_hat, c_hat, theta);
    let n_v2 = min_vacuum_rank(&s_tilde);
    let b_v1 = theta * c_hat.transpose() * diag_j(c_hat.nrows());

    if n_v2 == 0 {
        return Ok(AugmentResult {
            s_tilde,
            n_v2,
            b_v1,
            b_v2: Mat::zeros(n, 0),
            w: CMat::zeros(0, n),
        });
    }

    let s = s_tilde.map(|x| Complex64::new(0.0, 0.25 * x));
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(core::cmp::Ordering::Equal)
    });

    let rows = n_v2 / 2;
    let mut w = CMat::zeros(rows, n);
    for (r, &idx) in order.iter().take(rows).enumerate() {
        let d = eig.eigenvalues[idx];
        // (|d| + d)^{1/2}; non-positive entries would give a zero row
        let gain = libm::sqrt(d.abs() + d);
        let mut v = eig.eigenvectors.column(idx).into_owned();
        fix_phase(&mut v);
        // row r of U is the conjugate transpose of eigenvector r
        for c in 0..n {
            w[(r, c)] = v[c].conj() * gain;
        }
    }

    let mut coupling = CMat::zeros(n, n_v2);
    coupling
        .view_mut((0, 0), (n, rows))
        .copy_from(&(-w.adjoint()));
    coupling
        .view_mut((0, rows), (n, rows))
        .copy_from(&w.transpose());
    let b_v2_c =
        linalg::to_complex(theta) * coupling * gamma_matrix(n_v2) * Complex64::new(0.0, 2.0);
    let b_v2 = real_part_checked(&b_v2_c).map_err(|residue| Error::NonRealBv2 { residue })?;

    Ok(AugmentResult {
        s_tilde,
        n_v2,
        b_v1,
        b_v2,
        w,
    })
}

/// Outcome of the skew Riccati state transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformResult {
    /// Skew solution of `X B̂ΘB̂ᵀ X - ÂᵀX - XÂ - ĈᵀΘĈ = 0`.
    pub x: Mat,
    /// Real factor with `X = TᵀΘT`.
    pub t: Mat,
    pub t_inv: Mat,
    pub a_tilde: Mat,
    pub b_tilde: Mat,
    pub c_tilde: Mat,
    pub b_v1_tilde: Mat,
}

/// Residual of the skew Riccati equation for a candidate `X`.
pub fn skew_riccati_residual(a_hat: &Mat, b_hat: &Mat, c_hat: &Mat, x: &Mat) -> Mat {
    let theta_y = canonical_theta(b_hat.ncols() / 2);
    let theta_eta = canonical_theta(c_hat.nrows() / 2);
    x * b_hat * theta_y * b_hat.transpose() * x
        - a_hat.transpose() * x
        - x * a_hat
        - c_hat.transpose() * theta_eta * c_hat
}

/// Looks for a state transformation `T` that makes `(TÂT⁻¹, TB̂, ĈT⁻¹)`
/// physically realizable with no `B_v2` term.
///
/// The skew Riccati solution comes from the stable invariant subspace of
/// `Z = [[Â, -B̂ΘB̂ᵀ], [-ĈᵀΘĈ, -Âᵀ]]`. Its spectrum `{±iλ_j}` is paired as
/// `(iλ_j, -iλ_j)` with `λ_j > 0` (largest first) and conjugate
/// eigenvectors, so `T = Ṽ D V†` is real.
pub fn skew_riccati_transform(
    a_hat: &Mat,
    b_hat: &Mat,
    c_hat: &Mat,
    theta: &Mat,
) -> Result<TransformResult> {
    check_triple(a_hat, b_hat, c_hat, theta)?;
    let n = a_hat.nrows();
    let theta_y = canonical_theta(b_hat.ncols() / 2);
    let theta_eta = canonical_theta(c_hat.nrows() / 2);

    let mut z = Mat::zeros(2 * n, 2 * n);
    z.view_mut((0, 0), (n, n)).copy_from(a_hat);
    z.view_mut((0, n), (n, n))
        .copy_from(&(-(b_hat * &theta_y * b_hat.transpose())));
    z.view_mut((n, 0), (n, n))
        .copy_from(&(-(c_hat.transpose() * &theta_eta * c_hat)));
    z.view_mut((n, n), (n, n)).copy_from(&(-a_hat.transpose()));

    let (x1, x2) = stable_subspace(&z)?;
    if rcond(&x1) < SINGULAR_RCOND {
        return Err(Error::SingularX1);
    }
    let xt = x1
        .transpose()
        .lu()
        .solve(&x2.transpose())
        .ok_or(Error::SingularX1)?;
    // the stable subspace is isotropic for the swap form, so X is skew
    let x = linalg::skew_part(&xt.transpose());
    if rcond(&x) < SINGULAR_RCOND {
        return Err(Error::SingularX);
    }

    let t = skew_factor(&x)?;
    let t_inv = linalg::inverse(&t).map_err(|_| Error::SingularX)?;

    let a_tilde = &t * a_hat * &t_inv;
    let b_tilde = &t * b_hat;
    let c_tilde = c_hat * &t_inv;
    let b_v1_tilde = theta * c_tilde.transpose() * diag_j(c_hat.nrows());

    Ok(TransformResult {
        x,
        t,
        t_inv,
        a_tilde,
        b_tilde,
        c_tilde,
        b_v1_tilde,
    })
}

/// Real `T` with `TᵀΘT = X` for a nonsingular real skew `X`.
fn skew_factor(x: &Mat) -> Result<Mat> {
    let n = x.nrows();
    let half = n / 2;
    let i = Complex64::new(0.0, 1.0);

    // iX is Hermitian; its eigenvalue μ belongs to the eigenvalue -iμ of X
    let h = x.map(|v| Complex64::new(0.0, v));
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(core::cmp::Ordering::Equal)
    });

    let mut v = CMat::zeros(n, n);
    let mut lambda = Vec::with_capacity(n);
    for (pair, &idx) in order.iter().take(half).enumerate() {
        let mu = eig.eigenvalues[idx];
        if mu >= 0.0 {
            return Err(Error::NonRealT { residue: mu });
        }
        let mut col = eig.eigenvectors.column(idx).into_owned();
        fix_phase(&mut col);
        let col = &col / Complex64::new(col.norm(), 0.0);
        v.set_column(2 * pair, &col);
        v.set_column(2 * pair + 1, &col.map(|z| z.conj()));
        // X col = iλ col, X conj(col) = -iλ conj(col) with λ = -μ
        lambda.push(i * (-mu));
        lambda.push(-i * (-mu));
    }

    let mut t_c = CMat::zeros(n, n);
    let r2 = core::f64::consts::FRAC_1_SQRT_2;
    let mut v_tilde = CMat::zeros(n, n);
    let mut d = CMat::zeros(n, n);
    for k in 0..half {
        v_tilde[(2 * k, 2 * k)] = Complex64::new(r2, 0.0);
        v_tilde[(2 * k, 2 * k + 1)] = Complex64::new(r2, 0.0);
        v_tilde[(2 * k + 1, 2 * k)] = Complex64::new(0.0, r2);
        v_tilde[(2 * k + 1, 2 * k + 1)] = Complex64::new(0.0, -r2);
    }
    for (k, l) in lambda.iter().enumerate() {
        // alternating i, -i
        let lt = if k % 2 == 0 { i } else { -i };
        d[(k, k)] = (l / lt).sqrt();
    }
    t_c += v_tilde * d * v.adjoint();
    real_part_checked(&t_c).map_err(|residue| Error::NonRealT { residue })
}

/// Borrowed `(A, B, C)` triple.
#[derive(Debug, Clone, Copy)]
pub struct StateSpace<'a> {
    pub a: &'a Mat,
    pub b: &'a Mat,
    pub c: &'a Mat,
}

impl<'a> StateSpace<'a> {
    pub fn new(a: &'a Mat, b: &'a Mat, c: &'a Mat) -> Self {
        StateSpace { a, b, c }
    }

    /// `C (sI - A)⁻¹ B`.
    pub fn transfer(&self, s: Complex64) -> Result<CMat> {
        let n = self.a.nrows();
        let eig = linalg::eigenvalues(self.a);
        let radius = eig.iter().fold(0.0_f64, |a, l| a.max(l.norm()));
        if eig.iter().any(|l| (s - l).norm() <= 1e-10 * (1.0 + radius)) {
            return Err(Error::SingularResolvent);
        }
        let resolvent = CMat::identity(n, n) * s - linalg::to_complex(self.a);
        let x = resolvent
            .lu()
            .solve(&linalg::to_complex(self.b))
            .ok_or(Error::SingularResolvent)?;
        Ok(linalg::to_complex(self.c) * x)
    }
}

/// Largest Frobenius distance between two transfer functions over the
/// sample points.
pub fn transfer_function_gap(
    sys1: StateSpace<'_>,
    sys2: StateSpace<'_>,
    s_samples: &[Complex64],
) -> Result<f64> {
    check_shape("B2", sys2.b, sys2.a.nrows(), sys1.b.ncols())?;
    check_shape("C2", sys2.c, sys1.c.nrows(), sys2.a.nrows())?;
    let mut gap = 0.0_f64;
    for &s in s_samples {
        let g1 = sys1.transfer(s)?;
        let g2 = sys2.transfer(s)?;
        gap = gap.max((g1 - g2).norm());
    }
    Ok(gap)
}

/// `s = iω` for `count` log-spaced `ω` in `[lo, hi]`.
pub fn imaginary_axis_grid(lo: f64, hi: f64, count: usize) -> Vec<Complex64> {
    let (l0, l1) = (libm::log10(lo), libm::log10(hi));
    (0..count)
        .map(|k| {
            let f = if count > 1 {
                k as f64 / (count - 1) as f64
            } else {
                0.0
            };
            Complex64::new(0.0, libm::pow(10.0, l0 + f * (l1 - l0)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::commutation_residual;
    use approx::assert_relative_eq;

    fn j() -> Mat {
        canonical_theta(1)
    }

    /// Scalar Kalman data for the equal-mirror cavity.
    fn scenario1(k_n: f64) -> (f64, f64) {
        let (k1, k2) = (0.1, 0.1);
        let q = ((k1 - k2) + ((k1 - k2) * (k1 - k2) + 4.0 * k1 * k2 * (1.0 + 2.0 * k_n)).sqrt())
            / (2.0 * k1);
        let gain = k1.sqrt() * (q - 1.0);
        let a_hat = -0.5 * (k1 + k2) - k1.sqrt() * gain;
        (a_hat, gain)
    }

    #[test]
    fn stilde_scalar_reductions() {
        let i2 = Mat::identity(2, 2);
        let s = stilde(&(&i2 * -0.1), &Mat::zeros(2, 2), &i2, &j());
        assert_relative_eq!(s, j() * -0.8, epsilon = 1e-15);

        let (a, k) = scenario1(10.0);
        let s = stilde(&(&i2 * a), &(&i2 * k), &i2, &j());
        assert_relative_eq!(s, j() * (-k * k - 2.0 * a - 1.0), epsilon = 1e-14);
        assert_relative_eq!(s[(0, 1)], -1.36696, epsilon = 1e-5);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(min_vacuum_rank(&(j() * -0.8)), 2);
        assert_eq!(min_vacuum_rank(&Mat::zeros(4, 4)), 0);
        let s = linalg::block_diag(&[&(j() * 3.0), &Mat::zeros(2, 2)]);
        assert_eq!(min_vacuum_rank(&s), 2);
    }

    #[test]
    fn b_v1_for_identity_output() {
        let i2 = Mat::identity(2, 2);
        let r = augment_noise(&(&i2 * -0.1), &Mat::zeros(2, 2), &i2, &j()).unwrap();
        assert_eq!(r.b_v1, -&i2);
    }

    #[test]
    fn augment_zero_gain_invariants() {
        let i2 = Mat::identity(2, 2);
        let a = &i2 * -0.1;
        let b = Mat::zeros(2, 2);
        let r = augment_noise(&a, &b, &i2, &j()).unwrap();
        assert_eq!(r.n_v2, 2);
        assert_relative_eq!(&r.b_v2 * r.b_v2.transpose(), &i2 * 0.8, epsilon = 1e-14);
        assert_relative_eq!(
            &r.b_v2 * j() * r.b_v2.transpose(),
            j() * -0.8,
            epsilon = 1e-14
        );
        let res = commutation_residual(&a, &[&b, &r.b_v1, &r.b_v2], &j(), &[&j(), &j(), &j()]);
        assert!(res.norm() < 1e-14);
    }

    #[test]
    fn augment_thermal_kalman_preserves_commutators() {
        let i2 = Mat::identity(2, 2);
        let (a, k) = scenario1(10.0);
        let (a, b) = (&i2 * a, &i2 * k);
        let r = augment_noise(&a, &b, &i2, &j()).unwrap();
        assert_eq!(r.n_v2, 2);
        let res = commutation_residual(&a, &[&b, &r.b_v1, &r.b_v2], &j(), &[&j(), &j(), &j()]);
        assert!(res.norm() < 1e-13, "residual {}", res.norm());
    }

    #[test]
    fn transform_scalar_root() {
        let i2 = Mat::identity(2, 2);
        let (a, k) = scenario1(0.1);
        assert_relative_eq!(a, -0.109545, epsilon = 1e-6);
        assert_relative_eq!(k, 0.030183, epsilon = 1e-6);
        let tr = skew_riccati_transform(&(&i2 * a), &(&i2 * k), &i2, &j()).unwrap();
        let x = tr.x[(0, 1)];
        assert_relative_eq!(tr.x, j() * x, epsilon = 1e-12);
        assert!((k * k * x * x + 2.0 * a * x + 1.0).abs() < 1e-10);
        let check = tr.t.transpose() * j() * &tr.t;
        assert!((check - &tr.x).norm() < 1e-10);
    }

    #[test]
    fn transform_fails_past_the_boundary() {
        // κ1 = 0.5, κ2 = 0.01, k_n = 70: â² < k²
        let (k1, k2, k_n): (f64, f64, f64) = (0.5, 0.01, 70.0);
        let q = ((k1 - k2) + ((k1 - k2).powi(2) + 4.0 * k1 * k2 * (1.0 + 2.0 * k_n)).sqrt())
            / (2.0 * k1);
        let k = k1.sqrt() * (q - 1.0);
        let a = -0.5 * (k1 + k2) - k1.sqrt() * k;
        assert!(a * a < k * k);
        let i2 = Mat::identity(2, 2);
        let r = skew_riccati_transform(&(&i2 * a), &(&i2 * k), &i2, &j());
        assert!(
            matches!(r, Err(Error::ImaginaryAxisEigenvalue { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn transfer_gap_examples() {
        let a = Mat::from_row_slice(2, 2, &[-1.0, 0.3, -0.2, -0.5]);
        let b = Mat::identity(2, 2);
        let c = Mat::identity(2, 2);
        let grid = imaginary_axis_grid(0.1, 10.0, 8);
        let s = StateSpace::new(&a, &b, &c);
        assert_eq!(transfer_function_gap(s, s, &grid).unwrap(), 0.0);
        let a2 = &a * 2.0;
        let gap = transfer_function_gap(s, StateSpace::new(&a2, &b, &c), &grid).unwrap();
        assert!(gap > 0.0);
        let osc = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let r = StateSpace::new(&osc, &b, &c).transfer(Complex64::new(0.0, 1.0));
        assert!(matches!(r, Err(Error::SingularResolvent)));
    }
}
