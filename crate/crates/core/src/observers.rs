//! Coherent observer designs and the steady-state error metric.
//!
//! Every design starts from a Kalman filter that treats the plant noise as
//! classical with intensity `S_w = Re F_w`, then sets `Â = A - KC`,
//! `B̂ = K`, `Ĉ = I`:
//!
//! - algorithm 1 adds the minimal vacuum inputs to that filter;
//! - algorithm 2 inflates the measurement noise by `ρ²I` before the
//!   Kalman step and keeps the `ρ` with the smallest error trace;
//! - algorithm 3 tries a state transformation that needs no `B_v2` and
//!   falls back to algorithm 1 when none exists.
//!
//! The heterodyne baseline is the Kalman filter on `dy + dw_H`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, hstack, symmetrize, Mat};
use crate::realizability::{augment_noise, skew_riccati_transform, TransformResult};
use crate::solvers::{solve_care, solve_lyapunov, KalmanDesign};
use crate::system::QuantumLinearSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Alg1,
    Alg2 { rho: f64 },
    Alg3 { transformed: bool },
}

/// Observer `dξ = Â ξ dt + B̂ dy + B_v1 dv1 + B_v2 dv2`, `dη = Ĉ ξ dt + dv1`.
///
/// For a transformed algorithm-3 observer, `b_v1` is the vacuum gain in the
/// transformed coordinates and `noise_gain_v1 = T⁻¹ b_v1` is the gain seen
/// in the plant coordinates. Otherwise the two coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentObserver {
    pub a_hat: Mat,
    pub b_hat: Mat,
    pub c_hat: Mat,
    pub b_v1: Mat,
    pub b_v2: Mat,
    pub n_v2: usize,
    pub noise_gain_v1: Mat,
    pub provenance: Provenance,
    pub kalman: KalmanDesign,
    pub transform: Option<TransformResult>,
}

/// Heterodyne measurement followed by a Kalman filter.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalObserver {
    pub k: Mat,
    pub a_hat: Mat,
    pub kalman: KalmanDesign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub j_bar: Mat,
    pub trace: f64,
    pub frobenius: f64,
    /// `-max Re λ(A - KC)`.
    pub hurwitz_margin: f64,
}

/// Estimation error dynamics `d(x - ξ) = A_e (x - ξ) dt + B_e dn` with
/// `dn dnᵀ` having real part `s_joint`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSystem {
    pub a_e: Mat,
    pub b_e: Mat,
    pub s_joint: Mat,
}

/// Anything whose estimation error against a plant is a linear system.
pub trait Estimator {
    fn gain(&self) -> &Mat;
    fn error_system(&self, plant: &QuantumLinearSystem) -> Result<ErrorSystem>;
}

fn check_gain(plant: &QuantumLinearSystem, k: &Mat) -> Result<()> {
    linalg::check_shape("observer gain", k, plant.n_x(), plant.n_y())
}

impl Estimator for CoherentObserver {
    fn gain(&self) -> &Mat {
        &self.b_hat
    }

    fn error_system(&self, plant: &QuantumLinearSystem) -> Result<ErrorSystem> {
        check_gain(plant, &self.b_hat)?;
        let k = &self.b_hat;
        let n = plant.n_x();
        let a_e = plant.a() - k * plant.c();
        let b_e = hstack(
            n,
            &[
                &(plant.b() - k * plant.d()),
                &(-&self.noise_gain_v1),
                &(-&self.b_v2),
            ],
        );
        let s_w = plant.ito().s;
        let v1 = Mat::identity(self.noise_gain_v1.ncols(), self.noise_gain_v1.ncols());
        let v2 = Mat::identity(self.b_v2.ncols(), self.b_v2.ncols());
        let s_joint = block_diag(&[&s_w, &v1, &v2]);
        Ok(ErrorSystem { a_e, b_e, s_joint })
    }
}

impl Estimator for ClassicalObserver {
    fn gain(&self) -> &Mat {
        &self.k
    }

    fn error_system(&self, plant: &QuantumLinearSystem) -> Result<ErrorSystem> {
        check_gain(plant, &self.k)?;
        let k = &self.k;
        let n = plant.n_x();
        let a_e = plant.a() - k * plant.c();
        let b_e = hstack(n, &[&(plant.b() - k * plant.d()), &(-k)]);
        let s_w = plant.ito().s;
        let s_joint = block_diag(&[&s_w, &Mat::identity(k.ncols(), k.ncols())]);
        Ok(ErrorSystem { a_e, b_e, s_joint })
    }
}

pub fn error_system<E: Estimator + ?Sized>(
    plant: &QuantumLinearSystem,
    observer: &E,
) -> Result<ErrorSystem> {
    observer.error_system(plant)
}

/// Steady-state symmetrized error covariance `J̄` from
/// `A_e J̄ + J̄ A_eᵀ + B_e S B_eᵀ = 0`.
pub fn evaluate_performance<E: Estimator + ?Sized>(
    plant: &QuantumLinearSystem,
    observer: &E,
) -> Result<PerformanceReport> {
    let es = observer.error_system(plant)?;
    let forcing = symmetrize(&(&es.b_e * &es.s_joint * es.b_e.transpose()));
    let j_bar = solve_lyapunov(&es.a_e, &forcing)?;
    Ok(PerformanceReport {
        trace: j_bar.trace(),
        frobenius: j_bar.norm(),
        hurwitz_margin: -linalg::max_real_part(&es.a_e),
        j_bar,
    })
}

fn require_physical(plant: &QuantumLinearSystem) -> Result<()> {
    if plant.is_physical() {
        Ok(())
    } else {
        Err(Error::Domain(
            "plant does not preserve commutation relations",
        ))
    }
}

/// Kalman filter with `S_w` as classical intensity and `extra_v2` added to
/// the measurement noise block.
fn plant_kalman(plant: &QuantumLinearSystem, extra_v2: Option<&Mat>) -> Result<KalmanDesign> {
    let s_w = plant.ito().s;
    let (b, d) = (plant.b(), plant.d());
    let v1 = symmetrize(&(b * &s_w * b.transpose()));
    let v12 = b * &s_w * d.transpose();
    let mut v2 = symmetrize(&(d * &s_w * d.transpose()));
    if let Some(extra) = extra_v2 {
        v2 += extra;
    }
    solve_care(plant.a(), plant.c(), &v1, &v12, &v2)
}

fn augmented_observer(
    plant: &QuantumLinearSystem,
    kalman: KalmanDesign,
    provenance: Provenance,
) -> Result<CoherentObserver> {
    let n = plant.n_x();
    let a_hat = plant.a() - &kalman.k * plant.c();
    let b_hat = kalman.k.clone();
    let c_hat = Mat::identity(n, n);
    let aug = augment_noise(&a_hat, &b_hat, &c_hat, plant.theta())?;
    Ok(CoherentObserver {
        a_hat,
        b_hat,
        c_hat,
        noise_gain_v1: aug.b_v1.clone(),
        b_v1: aug.b_v1,
        b_v2: aug.b_v2,
        n_v2: aug.n_v2,
        provenance,
        kalman,
        transform: None,
    })
}

/// Kalman filter made physically realizable with the minimal number of
/// additional vacuum inputs.
pub fn design_algorithm1(plant: &QuantumLinearSystem) -> Result<CoherentObserver> {
    require_physical(plant)?;
    let kalman = plant_kalman(plant, None)?;
    augmented_observer(plant, kalman, Provenance::Alg1)
}

/// Search settings for algorithm 2.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSearch {
    pub candidates: Vec<f64>,
    /// Golden-section iterations around the best grid point; 0 disables.
    pub refine_iterations: usize,
}

impl RhoSearch {
    pub fn grid_only(candidates: Vec<f64>) -> Self {
        RhoSearch {
            candidates,
            refine_iterations: 0,
        }
    }
}

impl Default for RhoSearch {
    /// `ρ = 0` plus 61 log-spaced points in `[1e-3, 1e2]`, refined by 20
    /// golden-section steps.
    fn default() -> Self {
        let mut candidates = Vec::with_capacity(62);
        candidates.push(0.0);
        for k in 0..61 {
            let exponent = -3.0 + 5.0 * k as f64 / 60.0;
            candidates.push(libm::pow(10.0, exponent));
        }
        RhoSearch {
            candidates,
            refine_iterations: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alg2Design {
    pub observer: CoherentObserver,
    pub report: PerformanceReport,
    pub rho_opt: f64,
    /// `(ρ, trace J̄)` for every grid candidate that produced an observer.
    pub curve: Vec<(f64, f64)>,
    pub skipped: Vec<(f64, Error)>,
}

fn alg2_candidate(
    plant: &QuantumLinearSystem,
    rho: f64,
) -> Result<(CoherentObserver, PerformanceReport)> {
    let n_y = plant.n_y();
    let extra = Mat::identity(n_y, n_y) * (rho * rho);
    let kalman = plant_kalman(plant, Some(&extra))?;
    let observer = augmented_observer(plant, kalman, Provenance::Alg2 { rho })?;
    // scored against the true plant, not the inflated one
    let report = evaluate_performance(plant, &observer)?;
    Ok((observer, report))
}

/// Algorithm 2: inflate the measurement noise by `ρ²I`, design as in
/// algorithm 1 and keep the `ρ` with the smallest `trace J̄`.
///
/// Candidates that fail are recorded in `skipped`; the call only fails when
/// every candidate does.
pub fn design_algorithm2(plant: &QuantumLinearSystem, search: &RhoSearch) -> Result<Alg2Design> {
    require_physical(plant)?;
    if search.candidates.is_empty() {
        return Err(Error::Domain("rho candidate list is empty"));
    }
    if search.candidates.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::Domain("rho candidates must be finite and >= 0"));
    }

    let mut best: Option<(CoherentObserver, PerformanceReport)> = None;
    let mut curve = Vec::with_capacity(search.candidates.len());
    let mut skipped = Vec::new();
    for &rho in &search.candidates {
        match alg2_candidate(plant, rho) {
            Ok((obs, rep)) => {
                curve.push((rho, rep.trace));
                if best.as_ref().is_none_or(|(_, b)| rep.trace < b.trace) {
                    best = Some((obs, rep));
                }
            }
            Err(e) => skipped.push((rho, e)),
        }
    }
    let (mut observer, mut report) = best.ok_or(Error::NoCandidate)?;

    if search.refine_iterations > 0 && curve.len() > 1 {
        let mut grid: Vec<f64> = curve.iter().map(|&(r, _)| r).collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        grid.dedup();
        let rho_best = match observer.provenance {
            Provenance::Alg2 { rho } => rho,
            _ => unreachable!("algorithm 2 candidates carry their rho"),
        };
        let pos = grid.iter().position(|&r| r == rho_best).unwrap_or(0);
        let lo = grid[pos.saturating_sub(1)];
        let hi = grid[(pos + 1).min(grid.len() - 1)];
        if hi > lo {
            if let Some((obs, rep)) = golden_section(plant, lo, hi, search.refine_iterations) {
                if rep.trace < report.trace {
                    observer = obs;
                    report = rep;
                }
            }
        }
    }

    let rho_opt = match observer.provenance {
        Provenance::Alg2 { rho } => rho,
        _ => unreachable!("algorithm 2 candidates carry their rho"),
    };
    Ok(Alg2Design {
        observer,
        report,
        rho_opt,
        curve,
        skipped,
    })
}

/// Golden-section minimization of `trace J̄(ρ)` on `[lo, hi]`, returning the
/// best point evaluated.
fn golden_section(
    plant: &QuantumLinearSystem,
    mut lo: f64,
    mut hi: f64,
    iterations: usize,
) -> Option<(CoherentObserver, PerformanceReport)> {
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let mut best: Option<(CoherentObserver, PerformanceReport)> = None;
    let eval =
        |rho: f64, best: &mut Option<(CoherentObserver, PerformanceReport)>| match alg2_candidate(
            plant, rho,
        ) {
            Ok((obs, rep)) => {
                let t = rep.trace;
                if best.as_ref().is_none_or(|(_, b)| t < b.trace) {
                    *best = Some((obs, rep));
                }
                t
            }
            Err(_) => f64::INFINITY,
        };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1, &mut best);
    let mut f2 = eval(x2, &mut best);
    for _ in 0..iterations {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2, &mut best);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alg3Design {
    pub observer: CoherentObserver,
    /// Why the transformation was not possible; `None` on success.
    pub fallback_reason: Option<Error>,
}

/// Algorithm 3: transform the algorithm-1 Kalman filter so it needs no
/// `B_v2`; revert to the algorithm-1 observer when that fails.
pub fn design_algorithm3(plant: &QuantumLinearSystem) -> Result<Alg3Design> {
    require_physical(plant)?;
    let kalman = plant_kalman(plant, None)?;
    let n = plant.n_x();
    let a_hat = plant.a() - &kalman.k * plant.c();
    let b_hat = kalman.k.clone();
    let c_hat = Mat::identity(n, n);
    match skew_riccati_transform(&a_hat, &b_hat, &c_hat, plant.theta()) {
        Ok(tr) => {
            let noise_gain_v1 = &tr.t_inv * &tr.b_v1_tilde;
            Ok(Alg3Design {
                observer: CoherentObserver {
                    a_hat,
                    b_hat,
                    c_hat,
                    b_v1: tr.b_v1_tilde.clone(),
                    b_v2: Mat::zeros(n, 0),
                    n_v2: 0,
                    noise_gain_v1,
                    provenance: Provenance::Alg3 { transformed: true },
                    kalman,
                    transform: Some(tr),
                },
                fallback_reason: None,
            })
        }
        Err(reason) => {
            let observer =
                augmented_observer(plant, kalman, Provenance::Alg3 { transformed: false })?;
            Ok(Alg3Design {
                observer,
                fallback_reason: Some(reason),
            })
        }
    }
}

/// Heterodyne detection (one extra unit of vacuum noise on every output
/// quadrature) followed by the matching Kalman filter.
pub fn design_classical(plant: &QuantumLinearSystem) -> Result<ClassicalObserver> {
    require_physical(plant)?;
    let n_y = plant.n_y();
    let kalman = plant_kalman(plant, Some(&Mat::identity(n_y, n_y)))?;
    Ok(ClassicalObserver {
        k: kalman.k.clone(),
        a_hat: plant.a() - &kalman.k * plant.c(),
        kalman,
    })
}
