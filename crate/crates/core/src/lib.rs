//! Coherent observer design for linear quantum stochastic systems.
//!
//! The crate works purely on real and complex dense matrices. Systems are
//! written in quadrature form with states and noises ordered
//! `(q1, p1, q2, p2, ...)`, and every commutation matrix is canonical
//! (block diagonal in `J = [[0, 1], [-1, 0]]`).
//!
//! The modules build on each other bottom-up:
//!
//! - [`system`]: state-space model, Itô noise structure, Hamiltonian
//!   realization and the commutation-preservation residual.
//! - [`solvers`]: filter Riccati, Lyapunov and stable invariant subspace
//!   routines.
//! - [`realizability`]: the rank test for the minimal number of extra
//!   vacuum inputs, noise augmentation and the skew Riccati state
//!   transformation.
//! - [`observers`]: the three coherent observer designs, the heterodyne
//!   baseline and the steady-state error covariance metric.
//!
//! No IO happens here; the crate is `no_std` with `alloc`.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod linalg;
pub mod observers;
pub mod realizability;
pub mod solvers;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{CMat, Mat};
pub use observers::{
    design_algorithm1, design_algorithm2, design_algorithm3, design_classical, error_system,
    evaluate_performance, Alg2Design, Alg3Design, ClassicalObserver, CoherentObserver, ErrorSystem,
    Estimator, PerformanceReport, Provenance, RhoSearch,
};
pub use realizability::{
    augment_noise, min_vacuum_rank, skew_riccati_transform, stilde, transfer_function_gap,
    AugmentResult, StateSpace, TransformResult,
};
pub use solvers::{
    integrate_covariance, solve_care, solve_lyapunov, stable_subspace, KalmanDesign,
};
pub use system::{
    canonical_theta, commutation_residual, gamma_matrix, ito_structure, make_cavity_plant,
    permutation_matrix, realize_from_hamiltonian, HamiltonianCoupling, ItoStructure, NoiseChannel,
    NoiseKind, QuantumLinearSystem,
};
