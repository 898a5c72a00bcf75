//! Values computed independently with scipy's Lyapunov solver and frozen
//! here.

mod common;

use approx::assert_relative_eq;
use common::point;
use optomech::dynamics::solve_lyapunov;
use optomech::sweep::{evaluate_point, figure_preset, find_critical_xi};
use optomech::{DerivedParams, Matrix8, PhysicalParams, SystemMatrices};

#[rustfmt::skip]
const FIG3_FULL: [[f64; 8]; 8] = [
    [1.8969207660395373, 0.6141997172192335, 1.497746351754473, -6.622512389653046e-16, -0.006019517374067511, 0.010839006066840903, 0.026431275264591585, -0.002383967276857532],
    [0.6141997172192332, 1.8969207660395384, 1.9231083409263642e-16, -1.4977463517544718, 0.010839006066841931, -0.006019517374067991, 0.0023839672768579674, -0.02643127526459105],
    [1.4977463517544727, 3.019017845707746e-16, 1.89692076603954, 0.6141997172192327, 0.026431275264592633, -0.0023839672768562873, -0.006019517374068097, 0.010839006066840086],
    [-6.642339542546985e-16, -1.4977463517544716, 0.6141997172192326, 1.896920766039537, 0.002383967276857815, -0.02643127526459364, 0.010839006066841824, -0.006019517374066632],
    [-0.006019517374067271, 0.010839006066841718, 0.0264312752645925, 0.002383967276857594, 1.8845088463717306, 0.6148612922329247, 1.5525082235127932, 3.3936871817847566e-16],
    [0.010839006066841022, -0.0060195173740679, -0.002383967276856171, -0.02643127526459328, 0.6148612922329244, 1.8845088463717383, -3.0159408325611483e-15, -1.552508223512796],
    [0.026431275264591613, 0.002383967276857848, -0.006019517374068264, 0.010839006066842106, 1.5525082235127932, -2.9428400151204404e-15, 1.8845088463717337, 0.6148612922329258],
    [-0.0023839672768576495, -0.026431275264591356, 0.01083900606684007, -0.006019517374066566, 3.4059368090324717e-16, -1.5525082235127958, 0.6148612922329258, 1.8845088463717286],
];

#[test]
fn full_covariance_matches_scipy() {
    let d = DerivedParams::new(&PhysicalParams::reference()).unwrap();
    let state = solve_lyapunov(&SystemMatrices::new(&d)).unwrap();
    let expected = Matrix8::from_fn(|i, j| FIG3_FULL[i][j]);
    let err = (state.full - expected).amax();
    assert!(err < 1e-12, "max abs deviation {err:e}");
}

#[test]
fn reference_point_measures() {
    let row = evaluate_point(&PhysicalParams::reference());
    let m = row.measures.unwrap();
    assert_eq!(m.steering_ab, 0.0);
    assert_eq!(m.steering_ba, 0.0);
    assert_relative_eq!(m.log_negativity, 0.5209203919249904, max_relative = 1e-12);
    assert_relative_eq!(m.nu_minus, 0.2969868038984358, max_relative = 1e-12);
    assert_relative_eq!(m.discord, 0.41380789454449396, max_relative = 1e-12);
}

#[test]
fn strongly_squeezed_point() {
    let row = evaluate_point(&point(10.0, 0.3, 2.0, 5e-5, 0.005));
    let [s1, s12, s13] = row.sigma.unwrap();
    assert_relative_eq!(row.n_th, 0.6748633447661927, max_relative = 1e-12);
    assert_relative_eq!(s1, 12.108907505528059, max_relative = 1e-11);
    assert_relative_eq!(s12, 5.9112806263150155, max_relative = 1e-11);
    assert_relative_eq!(s13, 8.77705765631527, max_relative = 1e-11);
    let m = row.measures.unwrap();
    assert_eq!(m.log_negativity, 0.0);
    assert_eq!(row.steering(), Some(0.0));
    assert_relative_eq!(m.discord, 0.09453647855097191, max_relative = 1e-9);
    assert_relative_eq!(m.nu_minus, 1.7909318560937149, max_relative = 1e-11);
}

#[test]
fn steerable_point() {
    let row = evaluate_point(&point(5.0, 0.05, 0.5, 1e-6, 0.001));
    let [s1, s12, s13] = row.sigma.unwrap();
    assert_relative_eq!(s1, 0.7256821545221213, max_relative = 1e-11);
    assert_relative_eq!(s12, 0.05644276064815113, max_relative = 1e-11);
    assert_relative_eq!(s13, 0.48340350356566564, max_relative = 1e-11);
    let m = row.measures.unwrap();
    assert_relative_eq!(m.steering_ab, 0.22191298126190956, max_relative = 1e-10);
    assert_relative_eq!(m.log_negativity, 0.7336346760893333, max_relative = 1e-11);
    assert_relative_eq!(m.discord, 0.3981611196629007, max_relative = 1e-10);
    assert_relative_eq!(m.nu_minus, 0.2400802931860543, max_relative = 1e-11);
}

#[test]
fn critical_xi_regression() {
    // scipy bisection to 1e-10 placed the threshold in
    // [0.32502386812120676, 0.32502386905252934].
    let held = figure_preset("fig4").unwrap().held;
    let c = find_critical_xi(&held, 0.0, 1.0).unwrap();
    assert!(c.hi - c.lo <= 1e-6);
    assert!(
        c.lo <= 0.32502386905252934 && c.hi >= 0.32502386812120676,
        "{c:?}"
    );
    assert!((c.xi_l - 0.325023868).abs() < 1e-6);
}

#[test]
fn single_precision_tracks_double() {
    let p = PhysicalParams::reference();
    let d64 = DerivedParams::new(&p).unwrap();
    let d32 = optomech::params::DerivedParams::<f32>::new(&p).unwrap();
    let s64 = solve_lyapunov(&SystemMatrices::new(&d64)).unwrap();
    let s32 = solve_lyapunov(&optomech::dynamics::SystemMatrices::new(&d32)).unwrap();
    for (a, b) in s64.mechanical_block.iter().zip(s32.mechanical_block.iter()) {
        assert!(
            (a - *b as f64).abs() < 1e-3 * s64.mechanical_block[(0, 0)],
            "{a} vs {b}"
        );
    }
}
