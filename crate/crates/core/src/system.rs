//! Linear quantum stochastic system model.
//!
//! A plant is `dx = A x dt + B dw`, `dy = C x dt + D dw` where `x` stacks
//! quadrature pairs and every pair of columns of `B` is one bosonic input
//! channel. Noise statistics enter through the Itô matrix
//! `dw dwᵀ = F dt`, split as `F = S + iT`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, check_shape, check_square, hstack, CMat, Mat};

const J: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Vacuum,
    Thermal,
}

/// One bosonic input field, occupying two quadrature columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    kind: NoiseKind,
    k_n: f64,
}

impl NoiseChannel {
    pub const fn vacuum() -> Self {
        NoiseChannel {
            kind: NoiseKind::Vacuum,
            k_n: 0.0,
        }
    }

    /// Thermal field with occupation `k_n`. A zero occupation is a vacuum.
    pub fn thermal(k_n: f64) -> Result<Self> {
        if !k_n.is_finite() || k_n < 0.0 {
            return Err(Error::Domain("thermal occupation must be finite and >= 0"));
        }
        if k_n == 0.0 {
            return Ok(Self::vacuum());
        }
        Ok(NoiseChannel {
            kind: NoiseKind::Thermal,
            k_n,
        })
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn k_n(&self) -> f64 {
        self.k_n
    }
}

/// Itô matrix of a list of independent channels, `F = S + iT`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItoStructure {
    pub f: CMat,
    pub s: Mat,
    pub t: Mat,
}

/// Builds the block-diagonal Itô matrix; each channel contributes
/// `[[1 + 2k_n, i], [-i, 1 + 2k_n]]`.
pub fn ito_structure(channels: &[NoiseChannel]) -> Result<ItoStructure> {
    if channels.is_empty() {
        return Err(Error::Domain("at least one noise channel is required"));
    }
    let n = 2 * channels.len();
    let mut s = Mat::zeros(n, n);
    for (k, ch) in channels.iter().enumerate() {
        let intensity = 1.0 + 2.0 * ch.k_n;
        s[(2 * k, 2 * k)] = intensity;
        s[(2 * k + 1, 2 * k + 1)] = intensity;
    }
    let t = canonical_theta(channels.len());
    let f = CMat::from_fn(n, n, |i, j| Complex64::new(s[(i, j)], t[(i, j)]));
    Ok(ItoStructure { f, s, t })
}

/// `diag(J, ..., J)` with `n_modes` blocks.
pub fn canonical_theta(n_modes: usize) -> Mat {
    let n = 2 * n_modes;
    let mut m = Mat::zeros(n, n);
    for k in 0..n_modes {
        m[(2 * k, 2 * k + 1)] = J[0][1];
        m[(2 * k + 1, 2 * k)] = J[1][0];
    }
    m
}

/// Permutation taking `(a1, a2, ..., a2m)` to `(a1, a3, ..., a2m-1, a2, a4, ..., a2m)`
/// when applied to a column vector.
pub fn permutation_matrix(n: usize) -> Mat {
    debug_assert!(n.is_multiple_of(2));
    let order = (0..n).step_by(2).chain((1..n).step_by(2));
    let mut p = Mat::zeros(n, n);
    for (row, col) in order.enumerate() {
        p[(row, col)] = 1.0;
    }
    p
}

/// `Γ = P diag(M)` with `M = ½[[1, i], [1, -i]]`.
pub fn gamma_matrix(n_w: usize) -> CMat {
    debug_assert!(n_w.is_multiple_of(2));
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let mut diag_m = CMat::zeros(n_w, n_w);
    for k in 0..n_w / 2 {
        diag_m[(2 * k, 2 * k)] = half;
        diag_m[(2 * k, 2 * k + 1)] = half_i;
        diag_m[(2 * k + 1, 2 * k)] = half;
        diag_m[(2 * k + 1, 2 * k + 1)] = -half_i;
    }
    linalg::to_complex(&permutation_matrix(n_w)) * diag_m
}

/// `AΘ + ΘAᵀ + Σ Bᵢ Tᵢ Bᵢᵀ`; zero exactly when the commutation relations
/// of the state are preserved.
pub fn commutation_residual(a: &Mat, gains: &[&Mat], theta: &Mat, t_blocks: &[&Mat]) -> Mat {
    debug_assert_eq!(gains.len(), t_blocks.len());
    let mut r = a * theta + theta * a.transpose();
    for (b, t) in gains.iter().zip(t_blocks) {
        r += *b * *t * b.transpose();
    }
    r
}

/// Absolute tolerance used to flag a system as physically realizable.
fn physical_tol(a: &Mat, b: &Mat) -> f64 {
    1e-8 * (1.0 + a.norm() + b.norm_squared())
}

/// Plant of the form `dx = A x dt + B dw`, `dy = C x dt + D dw` with
/// canonical commutation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLinearSystem {
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
    theta: Mat,
    channels: Vec<NoiseChannel>,
    physical: bool,
}

impl QuantumLinearSystem {
    /// Validates dimensions and flags the system physical when its
    /// commutation residual vanishes.
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat, channels: Vec<NoiseChannel>) -> Result<Self> {
        let n_x = a.nrows();
        if n_x == 0 || !n_x.is_multiple_of(2) {
            return Err(Error::Domain("state dimension must be even and positive"));
        }
        check_square("A", &a, n_x)?;
        let n_w = 2 * channels.len();
        if n_w == 0 {
            return Err(Error::Domain("at least one noise channel is required"));
        }
        check_shape("B", &b, n_x, n_w)?;
        let n_y = c.nrows();
        if n_y == 0 || !n_y.is_multiple_of(2) {
            return Err(Error::Domain("output dimension must be even and positive"));
        }
        if n_y > n_w {
            return Err(Error::Domain(
                "output dimension must not exceed noise dimension",
            ));
        }
        check_shape("C", &c, n_y, n_x)?;
        check_shape("D", &d, n_y, n_w)?;
        if a.iter()
            .chain(b.iter())
            .chain(c.iter())
            .chain(d.iter())
            .any(|x| !x.is_finite())
        {
            return Err(Error::Domain("system matrices must be finite"));
        }
        let theta = canonical_theta(n_x / 2);
        let mut sys = QuantumLinearSystem {
            a,
            b,
            c,
            d,
            theta,
            channels,
            physical: false,
        };
        sys.physical = sys.commutation_residual().norm() <= physical_tol(&sys.a, &sys.b);
        Ok(sys)
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }
    pub fn b(&self) -> &Mat {
        &self.b
    }
    pub fn c(&self) -> &Mat {
        &self.c
    }
    pub fn d(&self) -> &Mat {
        &self.d
    }
    pub fn theta(&self) -> &Mat {
        &self.theta
    }
    pub fn channels(&self) -> &[NoiseChannel] {
        &self.channels
    }
    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_w(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }
    pub fn is_physical(&self) -> bool {
        self.physical
    }

    pub fn ito(&self) -> ItoStructure {
        // channel list is non-empty by construction
        ito_structure(&self.channels).expect("validated channel list")
    }

    pub fn commutation_residual(&self) -> Mat {
        let ito = self.ito();
        commutation_residual(&self.a, &[&self.b], &self.theta, &[&ito.t])
    }
}

/// Quadratic Hamiltonian `½xᵀRx` and linear coupling `L = Λx`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianCoupling {
    r: Mat,
    lambda: CMat,
    n_y: usize,
}

impl HamiltonianCoupling {
    pub fn new(r: Mat, lambda: CMat, n_y: usize) -> Result<Self> {
        let n_x = r.nrows();
        if n_x == 0 || !n_x.is_multiple_of(2) {
            return Err(Error::Domain("state dimension must be even and positive"));
        }
        check_square("R", &r, n_x)?;
        if r != r.transpose() {
            return Err(Error::Domain("R must be symmetric"));
        }
        if lambda.ncols() != n_x {
            return Err(Error::DimensionMismatch {
                what: "Lambda columns",
                expected: n_x,
                found: lambda.ncols(),
            });
        }
        let n_w = 2 * lambda.nrows();
        if n_y == 0 || !n_y.is_multiple_of(2) || n_y > n_w {
            return Err(Error::Domain("n_y must be even, positive and at most n_w"));
        }
        Ok(HamiltonianCoupling { r, lambda, n_y })
    }

    pub fn r(&self) -> &Mat {
        &self.r
    }
    pub fn lambda(&self) -> &CMat {
        &self.lambda
    }
    pub fn n_y(&self) -> usize {
        self.n_y
    }
}

/// Forward construction of `(A, B, C, D)` from a Hamiltonian and coupling.
///
/// All input channels are vacuum; the commutation structure does not
/// depend on the occupation.
pub fn realize_from_hamiltonian(hc: &HamiltonianCoupling) -> Result<QuantumLinearSystem> {
    let n_x = hc.r.nrows();
    let lambda = &hc.lambda;
    let n_modes_w = lambda.nrows();
    let n_w = 2 * n_modes_w;
    let n_y = hc.n_y;
    let theta = canonical_theta(n_x / 2);
    let theta_c = linalg::to_complex(&theta);
    let i = Complex64::new(0.0, 1.0);

    let ll = lambda.adjoint() * lambda;
    let a = (&hc.r + ll.map(|z| z.im)) * 2.0;
    let a = &theta * a;

    let mut coupling = CMat::zeros(n_x, n_w);
    coupling
        .view_mut((0, 0), (n_x, n_modes_w))
        .copy_from(&(-lambda.adjoint()));
    coupling
        .view_mut((0, n_modes_w), (n_x, n_modes_w))
        .copy_from(&lambda.transpose());
    let b_c = theta_c * coupling * gamma_matrix(n_w) * (i * 2.0);
    let b = linalg::real_part_checked(&b_c)
        .map_err(|residue| Error::NonRealResult { what: "B", residue })?;

    // Σ selects the first n_y/2 channels; applying diag(Σ, Σ) to the
    // stacked [Λ + Λ#; -iΛ + iΛ#] keeps rows of both quadrature halves.
    let half = n_y / 2;
    let mut stacked = CMat::zeros(n_y, n_x);
    for k in 0..half {
        for col in 0..n_x {
            let l = lambda[(k, col)];
            stacked[(k, col)] = l + l.conj();
            stacked[(half + k, col)] = -i * l + i * l.conj();
        }
    }
    let c_c = linalg::to_complex(&permutation_matrix(n_y).transpose()) * stacked;
    let c = linalg::real_part_checked(&c_c)
        .map_err(|residue| Error::NonRealResult { what: "C", residue })?;

    let mut d = Mat::zeros(n_y, n_w);
    for k in 0..n_y {
        d[(k, k)] = 1.0;
    }
    let channels = alloc::vec![NoiseChannel::vacuum(); n_modes_w];
    QuantumLinearSystem::new(a, b, c, d, channels)
}

/// Two-mirror optical cavity: vacuum input through mirror 1 (which is also
/// the output port) and thermal input of occupation `k_n` through mirror 2.
pub fn make_cavity_plant(kappa1: f64, kappa2: f64, k_n: f64) -> Result<QuantumLinearSystem> {
    if !(kappa1 > 0.0 && kappa1.is_finite()) || !(kappa2 > 0.0 && kappa2.is_finite()) {
        return Err(Error::Domain("cavity decay rates must be positive"));
    }
    let thermal = NoiseChannel::thermal(k_n)?;
    let i2 = Mat::identity(2, 2);
    let s1 = libm::sqrt(kappa1);
    let s2 = libm::sqrt(kappa2);
    let a = &i2 * (-0.5 * (kappa1 + kappa2));
    let b = hstack(2, &[&(&i2 * -s1), &(&i2 * -s2)]);
    let c = &i2 * s1;
    let d = hstack(2, &[&i2, &Mat::zeros(2, 2)]);
    QuantumLinearSystem::new(a, b, c, d, alloc::vec![NoiseChannel::vacuum(), thermal])
}
