use nalgebra::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qobs_core::linalg::{is_hurwitz, max_real_part};
use qobs_core::realizability::{imaginary_axis_grid, skew_riccati_residual, StateSpace};
use qobs_core::{
    augment_noise, canonical_theta, commutation_residual, ito_structure, min_vacuum_rank,
    realize_from_hamiltonian, skew_riccati_transform, solve_care, solve_lyapunov, stilde,
    transfer_function_gap, CMat, HamiltonianCoupling, Mat, NoiseChannel,
};

fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.gen_range(-scale..scale))
}

fn random_hurwitz(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let m = random_mat(rng, n, n, 1.0);
    let shift = max_real_part(&m) + rng.gen_range(0.05..1.0);
    m - Mat::identity(n, n) * shift
}

/// Random observer triple: Hurwitz Â, random B̂ (n_y ∈ {2, n}), Ĉ = I.
fn random_triple(rng: &mut ChaCha8Rng) -> (Mat, Mat, Mat) {
    let n = if rng.gen_bool(0.5) { 2 } else { 4 };
    let n_y = if rng.gen_bool(0.5) { 2 } else { n };
    let a = random_hurwitz(rng, n);
    let scale = 10f64.powf(rng.gen_range(-2.0..0.3));
    let b = random_mat(rng, n, n_y, scale);
    (a, b, Mat::identity(n, n))
}

fn j_blocks(m: &Mat) -> Mat {
    canonical_theta(m.ncols() / 2)
}

fn dim_strategy() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(6)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hamiltonian_realizations_preserve_commutators(
        n_x in dim_strategy(),
        n_w_modes in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_mat(&mut rng, n_x, n_x, 1.0);
        let r = (&r + r.transpose()) * 0.5;
        let lambda = CMat::from_fn(n_w_modes, n_x, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let n_y = 2 * rng.gen_range(1..=n_w_modes);
        let hc = HamiltonianCoupling::new(r, lambda, n_y).unwrap();
        let sys = realize_from_hamiltonian(&hc).unwrap();
        let res = sys.commutation_residual().norm();
        prop_assert!(res <= 1e-10 * (1.0 + sys.a().norm()), "residual {res}");
        prop_assert!(sys.is_physical());
        let mut d = Mat::zeros(n_y, 2 * n_w_modes);
        for k in 0..n_y { d[(k, k)] = 1.0; }
        prop_assert_eq!(sys.d(), &d);
    }

    #[test]
    fn ito_structure_invariants(kns in proptest::collection::vec(0.0f64..100.0, 1..5)) {
        let channels: Vec<_> = kns.iter().map(|&k| NoiseChannel::thermal(k).unwrap()).collect();
        let ito = ito_structure(&channels).unwrap();
        prop_assert_eq!(&ito.s, &ito.s.transpose());
        prop_assert_eq!(&ito.t, &(-ito.t.transpose()));
        prop_assert_eq!(ito.f.adjoint(), ito.f.clone());
        let hermitian = nalgebra::SymmetricEigen::new(ito.f.clone());
        prop_assert!(hermitian.eigenvalues.iter().all(|&l| l >= -1e-12));
    }

    #[test]
    fn canonical_theta_squares_exactly(n in 1usize..9) {
        let t = canonical_theta(n);
        prop_assert_eq!(&t * &t, -Mat::identity(2 * n, 2 * n));
    }

    #[test]
    fn stilde_is_skew_and_rank_even(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = random_triple(&mut rng);
        let theta = canonical_theta(a.nrows() / 2);
        let s = stilde(&a, &b, &c, &theta);
        prop_assert_eq!(&s.transpose(), &(-&s));
        prop_assert_eq!(min_vacuum_rank(&s) % 2, 0);
    }
}

#[test]
fn random_care_instances_are_stabilizing() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut solved = 0;
    for _ in 0..200 {
        let n = if rng.gen_bool(0.5) { 2 } else { 4 };
        let m = if rng.gen_bool(0.5) { 2 } else { n };
        let a = random_mat(&mut rng, n, n, 1.0);
        let c = random_mat(&mut rng, m, n, 1.0);
        // joint intensity from a random factor keeps [[V1, V12], [V12ᵀ, V2]] PSD
        let f = random_mat(&mut rng, n + m, n + m + 2, 1.0);
        let v = &f * f.transpose() + Mat::identity(n + m, n + m) * 0.1;
        let v1 = v.view((0, 0), (n, n)).into_owned();
        let v12 = v.view((0, n), (n, m)).into_owned();
        let v2 = v.view((n, n), (m, m)).into_owned();
        let d = solve_care(&a, &c, &v1, &v12, &v2).expect("generic instance is stabilizable");
        assert!(
            d.residual_norm <= 1e-8 * (1.0 + d.q.norm()),
            "residual {}",
            d.residual_norm
        );
        assert!((&d.q - d.q.transpose()).norm() <= 1e-10 * (1.0 + d.q.norm()));
        assert!(is_hurwitz(&(&a - &d.k * &c)));
        let q_eig = nalgebra::SymmetricEigen::new(d.q.clone());
        assert!(q_eig
            .eigenvalues
            .iter()
            .all(|&l| l >= -1e-9 * (1.0 + d.q.norm())));
        solved += 1;
    }
    assert_eq!(solved, 200);
}

#[test]
fn lyapunov_residual_on_random_stable_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = 2 * rng.gen_range(1..=4);
        let a = random_hurwitz(&mut rng, n);
        let f = random_mat(&mut rng, n, n, 1.0);
        let q = &f * f.transpose();
        let p = solve_lyapunov(&a, &q).unwrap();
        let res = (&a * &p + &p * a.transpose() + &q).norm();
        assert!(res <= 1e-8 * (1.0 + p.norm()));
    }
}

#[test]
fn augmentation_and_transformation_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid = imaginary_axis_grid(0.1, 10.0, 8);
    let mut transformed = 0;
    for _ in 0..100 {
        let (a, b, c) = random_triple(&mut rng);
        let n = a.nrows();
        let theta = canonical_theta(n / 2);

        let aug = augment_noise(&a, &b, &c, &theta).unwrap();
        assert_eq!(aug.n_v2, min_vacuum_rank(&aug.s_tilde));
        assert_eq!(aug.n_v2, aug.b_v2.ncols());
        assert_eq!(aug.n_v2 % 2, 0);
        assert_eq!(
            aug.b_v1,
            &theta * c.transpose() * canonical_theta(c.nrows() / 2)
        );
        let gains = [&b, &aug.b_v1, &aug.b_v2];
        let t_blocks = [j_blocks(&b), j_blocks(&aug.b_v1), j_blocks(&aug.b_v2)];
        let res = commutation_residual(
            &a,
            &gains,
            &theta,
            &[&t_blocks[0], &t_blocks[1], &t_blocks[2]],
        );
        assert!(res.norm() <= 1e-8, "augmented residual {}", res.norm());
        let bb = &aug.b_v2 * aug.b_v2.transpose();
        assert!((&bb - bb.transpose()).norm() <= 1e-12 * (1.0 + bb.norm()));

        if let Ok(tr) = skew_riccati_transform(&a, &b, &c, &theta) {
            transformed += 1;
            let scale = 1.0 + tr.x.norm();
            assert!((&tr.x + tr.x.transpose()).norm() == 0.0);
            assert!(skew_riccati_residual(&a, &b, &c, &tr.x).norm() <= 1e-8 * scale);
            assert!((tr.t.transpose() * &theta * &tr.t - &tr.x).norm() <= 1e-8 * scale);
            assert_eq!(
                tr.b_v1_tilde,
                &theta * tr.c_tilde.transpose() * canonical_theta(c.nrows() / 2)
            );
            let res = commutation_residual(
                &tr.a_tilde,
                &[&tr.b_tilde, &tr.b_v1_tilde],
                &theta,
                &[&j_blocks(&tr.b_tilde), &j_blocks(&tr.b_v1_tilde)],
            );
            assert!(res.norm() <= 1e-8, "transformed residual {}", res.norm());
            let gap = transfer_function_gap(
                StateSpace::new(&a, &b, &c),
                StateSpace::new(&tr.a_tilde, &tr.b_tilde, &tr.c_tilde),
                &grid,
            )
            .unwrap();
            assert!(gap <= 1e-8, "transfer function gap {gap}");
        }
    }
    // small gains keep the Z spectrum off the imaginary axis often enough
    assert!(
        transformed >= 10,
        "only {transformed} transformations succeeded"
    );
}

#[test]
fn metric_ignores_the_phase_freedom_in_b_v2() {
    use qobs_core::{design_algorithm1, evaluate_performance, make_cavity_plant};
    for k_n in [0.0, 3.0, 250.0] {
        let plant = make_cavity_plant(0.5, 0.01, k_n).unwrap();
        let obs = design_algorithm1(&plant).unwrap();
        let base = evaluate_performance(&plant, &obs).unwrap();
        for phi in [0.3f64, 1.1, 2.9] {
            // an eigenvector phase e^{iφ} rotates the v2 quadrature pair
            let rot = Mat::from_row_slice(2, 2, &[phi.cos(), phi.sin(), -phi.sin(), phi.cos()]);
            let mut rotated = obs.clone();
            rotated.b_v2 = &obs.b_v2 * &rot;
            let theta = canonical_theta(1);
            let res = commutation_residual(
                &rotated.a_hat,
                &[&rotated.b_hat, &rotated.b_v1, &rotated.b_v2],
                &theta,
                &[&theta, &theta, &theta],
            );
            assert!(res.norm() < 1e-12);
            let rep = evaluate_performance(&plant, &rotated).unwrap();
            assert!((&rep.j_bar - &base.j_bar).norm() <= 1e-10 * (1.0 + base.j_bar.norm()));
        }
    }
}
