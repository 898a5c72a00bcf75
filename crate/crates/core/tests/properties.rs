mod common;

use common::{exchange, local_rotation, point, random_physical_covariance};
use optomech::dynamics::{lyapunov_residual, solve_lyapunov, symplectic_spectrum};
use optomech::measures::{
    correlations, gaussian_discord, gaussian_steering, log_negativity, symplectic_eigenvalues,
};
use optomech::sweep::evaluate_point;
use optomech::{DerivedParams, Error, SystemMatrices, TwoModeCovariance};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn covariance(seed: u64) -> (nalgebra::Matrix4<f64>, [f64; 2]) {
    random_physical_covariance(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn symplectic_routes_agree(seed in any::<u64>()) {
        let (sigma, built) = covariance(seed);
        let cov = TwoModeCovariance::new(sigma).unwrap();
        let (tp, tm) = symplectic_eigenvalues(&cov).unwrap();
        let spectral = symplectic_spectrum(&sigma).unwrap();
        prop_assert!((tp - spectral[1]).abs() < 1e-9 && (tm - spectral[0]).abs() < 1e-9);
        prop_assert!((tp - built[0]).abs() < 1e-9 && (tm - built[1]).abs() < 1e-9);
    }

    #[test]
    fn local_rotations_leave_steering_and_negativity_unchanged(
        seed in any::<u64>(),
        a in 0.0..std::f64::consts::TAU,
        b in 0.0..std::f64::consts::TAU,
    ) {
        let (sigma, _) = covariance(seed);
        let u = local_rotation(a, b);
        let c0 = TwoModeCovariance::new(sigma).unwrap();
        let c1 = TwoModeCovariance::new(u * sigma * u.transpose()).unwrap();
        let (e0, s0) = (log_negativity(&c0).unwrap().0, gaussian_steering(&c0).unwrap());
        let (e1, s1) = (log_negativity(&c1).unwrap().0, gaussian_steering(&c1).unwrap());
        prop_assert!((e0 - e1).abs() < 1e-9);
        prop_assert!((s0.a_to_b - s1.a_to_b).abs() < 1e-9);
        prop_assert!((s0.b_to_a - s1.b_to_a).abs() < 1e-9);
    }

    #[test]
    fn exchanging_modes_swaps_steering_directions(seed in any::<u64>()) {
        let (sigma, _) = covariance(seed);
        let p = exchange();
        let c0 = TwoModeCovariance::new(sigma).unwrap();
        let c1 = TwoModeCovariance::new(p * sigma * p).unwrap();
        prop_assert!((log_negativity(&c0).unwrap().0 - log_negativity(&c1).unwrap().0).abs() < 1e-9);
        let (s0, s1) = (gaussian_steering(&c0).unwrap(), gaussian_steering(&c1).unwrap());
        prop_assert!((s0.a_to_b - s1.b_to_a).abs() < 1e-9);
        prop_assert!((s0.b_to_a - s1.a_to_b).abs() < 1e-9);
    }

    #[test]
    fn discord_rejects_positive_det_z(seed in any::<u64>()) {
        let (sigma, _) = covariance(seed);
        let cov = TwoModeCovariance::new(sigma).unwrap();
        if cov.det_z > 1e-9 {
            let unsupported = matches!(gaussian_discord(&cov), Err(Error::UnsupportedDiscordBranch { .. }));
            prop_assert!(unsupported);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn system_states_are_rotation_invariant(
        c in 0.0..60.0f64,
        xi in 0.0..0.6f64,
        r in 0.0..3.0f64,
        a in 0.0..std::f64::consts::TAU,
        b in 0.0..std::f64::consts::TAU,
    ) {
        let d = DerivedParams::new(&point(c, xi, r, 1e-4, 0.01)).unwrap();
        let sigma = solve_lyapunov(&SystemMatrices::new(&d)).unwrap().mechanical_block;
        let u = local_rotation(a, b);
        let m0 = correlations(&TwoModeCovariance::new(sigma).unwrap(), true).unwrap();
        let m1 = correlations(&TwoModeCovariance::new(u * sigma * u.transpose()).unwrap(), true).unwrap();
        let p = exchange();
        let m2 = correlations(&TwoModeCovariance::new(p * sigma * p).unwrap(), true).unwrap();
        for m in [m1, m2] {
            let scale = 1.0 + m0.discord + m0.log_negativity;
            prop_assert!((m0.log_negativity - m.log_negativity).abs() < 1e-9 * scale);
            prop_assert!((m0.discord - m.discord).abs() < 1e-8 * scale);
            prop_assert!((m0.steering_ab - m.steering_ab).abs() < 1e-9 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stable_points_solve_accurately(
        c in 0.0..60.0f64,
        xi in 0.0..0.6f64,
        r in 0.0..3.0f64,
        t in 0.0..5e-3f64,
        gk in 0.001..0.05f64,
    ) {
        let d = DerivedParams::new(&point(c, xi, r, t, gk)).unwrap();
        let m = SystemMatrices::new(&d);
        let state = solve_lyapunov(&m).unwrap();
        prop_assert!(state.residual < 1e-10);
        prop_assert!(lyapunov_residual(&m.drift, &state.full, &m.noise) < 1e-10);
        prop_assert!(state.min_symplectic >= 0.5 - 1e-9);
        prop_assert_eq!(state.full, state.full.transpose());
        let row = evaluate_point(&point(c, xi, r, t, gk));
        let meas = row.measures.unwrap();
        prop_assert!(row.steering().unwrap() <= meas.log_negativity + 1e-12);
        prop_assert!(meas.discord >= 0.0);
        if meas.discord > 1.0 {
            prop_assert!(meas.log_negativity > 0.0);
        }
    }

    #[test]
    fn coupling_scales_with_root_cooperativity(c in 0.1..100.0f64, gk in 0.001..0.05f64) {
        let d1 = DerivedParams::new(&point(c, 0.2, 1.0, 1e-4, gk)).unwrap();
        let d4 = DerivedParams::new(&point(4.0 * c, 0.2, 1.0, 1e-4, gk)).unwrap();
        prop_assert!((d4.coupling / d1.coupling - 2.0).abs() < 1e-12);
        prop_assert!((d1.cooperativity - c).abs() < 1e-12 * c);
    }

    #[test]
    fn measures_vary_continuously(r in 0.0..2.9f64, xi in 0.0..0.3f64) {
        let a = evaluate_point(&point(32.11, xi, r, 1e-4, 0.01)).measures.unwrap();
        let b = evaluate_point(&point(32.11, xi, r + 1e-7, 1e-4, 0.01)).measures.unwrap();
        prop_assert!((a.log_negativity - b.log_negativity).abs() < 1e-5);
        prop_assert!((a.discord - b.discord).abs() < 1e-5);
        prop_assert!((a.nu_minus - b.nu_minus).abs() < 1e-5);
    }
}
