#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix4};
use optomech::params::Drive;
use optomech::PhysicalParams;
use rand::Rng;

pub fn kappa() -> f64 {
    std::f64::consts::TAU * 14_000.0
}

/// Reference membrane with the given dimensionless inputs.
pub fn point(c: f64, xi: f64, r: f64, t: f64, gamma_over_kappa: f64) -> PhysicalParams {
    let mut p = PhysicalParams::reference();
    p.drive = Drive::Cooperativity(c);
    p.hopping_lambda = xi * p.kappa;
    p.squeezing_r = r;
    p.temperature = t;
    p.gamma = gamma_over_kappa * p.kappa;
    p
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

fn local(rng: &mut impl Rng) -> Matrix2<f64> {
    let sq = rng.random_range(-1.0..1.0f64);
    rotation(rng.random_range(0.0..std::f64::consts::TAU))
        * Matrix2::new((-sq).exp(), 0.0, 0.0, sq.exp())
        * rotation(rng.random_range(0.0..std::f64::consts::TAU))
}

fn block_diag(a: Matrix2<f64>, b: Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&b);
    m
}

/// Random two-mode covariance `S diag(ν₁, ν₁, ν₂, ν₂) Sᵀ` with symplectic
/// eigenvalues in [1/2, 3] and `S` a product of local operations, a beam
/// splitter and a two-mode squeezer. Returns the matrix and the sorted
/// symplectic eigenvalues it was built from.
pub fn random_physical_covariance(rng: &mut impl Rng) -> (Matrix4<f64>, [f64; 2]) {
    let n1 = rng.random_range(0.5..3.0f64);
    let n2 = rng.random_range(0.5..3.0f64);
    let t = rng.random_range(0.0..std::f64::consts::PI);
    let (st, ct) = t.sin_cos();
    let bs = Matrix4::new(
        ct, 0.0, st, 0.0, //
        0.0, ct, 0.0, st, //
        -st, 0.0, ct, 0.0, //
        0.0, -st, 0.0, ct,
    );
    let s = rng.random_range(0.0..1.2f64);
    let (ch, sh) = (s.cosh(), s.sinh());
    let tms = Matrix4::new(
        ch, 0.0, sh, 0.0, //
        0.0, ch, 0.0, -sh, //
        sh, 0.0, ch, 0.0, //
        0.0, -sh, 0.0, ch,
    );
    let sym = block_diag(local(rng), local(rng)) * bs * tms * block_diag(local(rng), local(rng));
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(n1, n1, n2, n2));
    let sigma = sym * d * sym.transpose();
    let sigma = (sigma + sigma.transpose()) * 0.5;
    (sigma, [n1.max(n2), n1.min(n2)])
}

/// `diag(R(θ₁), R(θ₂))`, a local phase rotation on each mode.
pub fn local_rotation(theta1: f64, theta2: f64) -> Matrix4<f64> {
    block_diag(rotation(theta1), rotation(theta2))
}

/// Swaps the two modes.
pub fn exchange() -> Matrix4<f64> {
    let mut p = Matrix4::zeros();
    p[(0, 2)] = 1.0;
    p[(1, 3)] = 1.0;
    p[(2, 0)] = 1.0;
    p[(3, 1)] = 1.0;
    p
}
