//! Linearized quadrature dynamics `u' = W u + η` and its steady state.
//!
//! The drift `W` and the symmetrized noise correlation matrix `R` are
//! assembled in the fixed [`QuadratureOrdering`]. The steady-state covariance
//! solves the continuous Lyapunov equation `Wσ + σWᵀ + R = 0`; it is found by
//! vectorizing to a 64×64 dense system `(I⊗W + W⊗I) vec σ = -vec R` and a
//! partially pivoted LU factorization, after rescaling all rates by the
//! largest drift entry. Every solve is followed by a residual check.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Complex, DMatrix, DVector, SMatrix, Schur};

use crate::error::{Error, Result};
use crate::params::DerivedParams;
use crate::scalar::{lit, to_f64, Real};

pub type Mat8<T> = SMatrix<T, 8, 8>;
pub type Mat4<T> = SMatrix<T, 4, 4>;

/// Index bookkeeping for the quadrature vector
/// `(q_b1, Y_b1, q_b2, Y_b2, q_c1, Y_c1, q_c2, Y_c2)`.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureOrdering;

impl QuadratureOrdering {
    pub const Q_B1: usize = 0;
    pub const Y_B1: usize = 1;
    pub const Q_B2: usize = 2;
    pub const Y_B2: usize = 3;
    pub const Q_C1: usize = 4;
    pub const Y_C1: usize = 5;
    pub const Q_C2: usize = 6;
    pub const Y_C2: usize = 7;
    pub const LABELS: [&'static str; 8] = [
        "q_b1", "Y_b1", "q_b2", "Y_b2", "q_c1", "Y_c1", "q_c2", "Y_c2",
    ];
}

/// One bosonic mode of the system: mechanical mirror `B1`/`B2` or cavity
/// field `C1`/`C2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    B1,
    B2,
    C1,
    C2,
}

impl Mode {
    /// Index of the mode's `q` quadrature; `Y` is the next one.
    pub fn q_index(self) -> usize {
        match self {
            Mode::B1 => QuadratureOrdering::Q_B1,
            Mode::B2 => QuadratureOrdering::Q_B2,
            Mode::C1 => QuadratureOrdering::Q_C1,
            Mode::C2 => QuadratureOrdering::Q_C2,
        }
    }
}

/// Two distinct modes whose joint 4×4 covariance is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModePair {
    first: Mode,
    second: Mode,
}

impl ModePair {
    pub const MECHANICAL: ModePair = ModePair {
        first: Mode::B1,
        second: Mode::B2,
    };
    pub const OPTICAL: ModePair = ModePair {
        first: Mode::C1,
        second: Mode::C2,
    };

    pub fn new(first: Mode, second: Mode) -> Result<Self> {
        if first == second {
            return Err(Error::InvalidModePair(format!(
                "{first:?} paired with itself"
            )));
        }
        Ok(Self { first, second })
    }

    pub fn indices(&self) -> [usize; 4] {
        let a = self.first.q_index();
        let b = self.second.q_index();
        [a, a + 1, b, b + 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrices<T: Real> {
    pub drift: Mat8<T>,
    pub noise: Mat8<T>,
}

impl<T: Real> SystemMatrices<T> {
    pub fn new(derived: &DerivedParams<T>) -> Self {
        Self {
            drift: build_drift(derived),
            noise: build_noise(derived),
        }
    }
}

/// Drift matrix: mechanical rows `-γ/2` on the diagonal and `+G` to their
/// own cavity, optical rows `-κ/2` and `-G`, and the hopping entries
/// `W[q_c1][Y_c2] = -λ`, `W[Y_c1][q_c2] = +λ`, `W[q_c2][Y_c1] = -λ`,
/// `W[Y_c2][q_c1] = +λ`.
pub fn build_drift<T: Real>(d: &DerivedParams<T>) -> Mat8<T> {
    let half: T = lit(0.5);
    let mut w = Mat8::<T>::zeros();
    for i in 0..4 {
        w[(i, i)] = -d.gamma * half;
        w[(i, i + 4)] = d.coupling;
        w[(i + 4, i)] = -d.coupling;
        w[(i + 4, i + 4)] = -d.kappa * half;
    }
    use QuadratureOrdering as Q;
    w[(Q::Q_C1, Q::Y_C2)] = -d.lambda;
    w[(Q::Y_C1, Q::Q_C2)] = d.lambda;
    w[(Q::Q_C2, Q::Y_C1)] = -d.lambda;
    w[(Q::Y_C2, Q::Q_C1)] = d.lambda;
    w
}

/// Stationary noise matrix: `γ' I₄` on the mirrors, `κ'` on the optical
/// diagonal and `±Mκ` between equal quadratures of the two cavities
/// (`+` for q–q, `-` for Y–Y).
pub fn build_noise<T: Real>(d: &DerivedParams<T>) -> Mat8<T> {
    let mut r = Mat8::<T>::zeros();
    for i in 0..4 {
        r[(i, i)] = d.gamma_prime;
        r[(i + 4, i + 4)] = d.kappa_prime;
    }
    use QuadratureOrdering as Q;
    let mk = d.m_sq * d.kappa;
    r[(Q::Q_C1, Q::Q_C2)] = mk;
    r[(Q::Q_C2, Q::Q_C1)] = mk;
    r[(Q::Y_C1, Q::Y_C2)] = -mk;
    r[(Q::Y_C2, Q::Y_C1)] = -mk;
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn as_str(self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T: Real> {
    pub verdict: Stability,
    pub max_real_part: T,
    /// ε_stab = 1e-9 × max(γ, κ), read off the drift diagonal.
    pub tolerance: T,
    pub eigenvalues: Vec<Complex<T>>,
}

impl<T: Real> StabilityReport<T> {
    pub fn is_stable(&self) -> bool {
        self.verdict == Stability::Stable
    }
}

/// Eigenvalue test of the drift matrix.
///
/// Stable iff every eigenvalue has real part below `-ε`, marginal iff the
/// largest real part is within `±ε`, with `ε = 1e-9·max(γ, κ)` and
/// `max(γ, κ) = 2·max|W_ii|`.
pub fn check_stability<T: Real>(drift: &Mat8<T>) -> Result<StabilityReport<T>> {
    let mut rate = T::zero();
    for i in 0..8 {
        rate = rate.max(drift[(i, i)].abs());
    }
    let tolerance = lit::<T>(2e-9) * rate;
    let eigenvalues = eigenvalues(&DMatrix::from_iterator(8, 8, drift.iter().copied()))?;
    let max_real_part = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(T::min_value().unwrap_or(-T::one() / T::zero()), |a, b| {
            a.max(b)
        });
    let verdict = if max_real_part < -tolerance {
        Stability::Stable
    } else if max_real_part.abs() <= tolerance {
        Stability::Marginal
    } else {
        Stability::Unstable
    };
    Ok(StabilityReport {
        verdict,
        max_real_part,
        tolerance,
        eigenvalues,
    })
}

fn eigenvalues<T: Real>(m: &DMatrix<T>) -> Result<Vec<Complex<T>>> {
    let eps = T::default_epsilon();
    let schur = Schur::try_new(m.clone(), eps, 10_000).ok_or(Error::EigenSolver)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Steady-state covariance of the full system.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState<T: Real> {
    pub full: Mat8<T>,
    /// Mirror–mirror block, indices 0..4.
    pub mechanical_block: Mat4<T>,
    /// `‖Wσ + σWᵀ + R‖_F / ‖R‖_F` after symmetrization.
    pub residual: T,
    /// `‖σ - σᵀ‖_F / ‖σ‖_F` of the raw solution, before symmetrization.
    pub asymmetry: T,
    /// Smallest symplectic eigenvalue of `full`.
    pub min_symplectic: T,
    pub max_real_part: T,
}

/// Relative Frobenius residual of the Lyapunov equation.
pub fn lyapunov_residual<T: Real>(w: &Mat8<T>, sigma: &Mat8<T>, r: &Mat8<T>) -> T {
    let res = w * sigma + sigma * w.transpose() + r;
    let scale = r.norm();
    if scale > T::zero() {
        res.norm() / scale
    } else {
        res.norm()
    }
}

/// Solves `Wσ + σWᵀ + R = 0` for a stable drift.
pub fn solve_lyapunov<T: Real>(m: &SystemMatrices<T>) -> Result<CovarianceState<T>> {
    let stability = check_stability(&m.drift)?;
    if !stability.is_stable() {
        return Err(Error::Unstable {
            verdict: stability.verdict.as_str(),
            max_real_part: to_f64(stability.max_real_part),
            tolerance: to_f64(stability.tolerance),
        });
    }

    let scale = m.drift.amax();
    let w = m.drift / scale;
    let r = m.noise / scale;

    let wd = DMatrix::from_iterator(8, 8, w.iter().copied());
    let eye = DMatrix::<T>::identity(8, 8);
    let a = eye.kronecker(&wd) + wd.kronecker(&eye);
    let b = DVector::from_iterator(64, r.iter().map(|&x| -x));
    let x = a
        .lu()
        .solve(&b)
        .ok_or(Error::Singular("Lyapunov vectorized system"))?;
    let raw = Mat8::from_iterator(x.iter().copied());

    let norm = raw.norm();
    let asymmetry = if norm > T::zero() {
        (raw - raw.transpose()).norm() / norm
    } else {
        T::zero()
    };
    if asymmetry > lit(T::ASYMMETRY_TOL) {
        return Err(Error::LyapunovAccuracy(format!(
            "raw solution asymmetry {:e} exceeds {:e}",
            to_f64(asymmetry),
            T::ASYMMETRY_TOL
        )));
    }
    let full = (raw + raw.transpose()) * lit::<T>(0.5);
    let residual = lyapunov_residual(&w, &full, &r);
    if residual.partial_cmp(&lit(T::RESIDUAL_TOL)) != Some(Ordering::Less) {
        return Err(Error::LyapunovAccuracy(format!(
            "relative residual {:e} exceeds {:e}",
            to_f64(residual),
            T::RESIDUAL_TOL
        )));
    }

    let spectrum = symplectic_spectrum(&full)?;
    let min_symplectic = spectrum[0];
    if min_symplectic < lit::<T>(0.5 - T::SPECTRUM_TOL) {
        return Err(Error::Unphysical(format!(
            "smallest symplectic eigenvalue {} < 1/2",
            to_f64(min_symplectic)
        )));
    }

    Ok(CovarianceState {
        mechanical_block: full.fixed_view::<4, 4>(0, 0).into_owned(),
        full,
        residual,
        asymmetry,
        min_symplectic,
        max_real_part: stability.max_real_part,
    })
}

/// 4×4 covariance of a mode pair, quadrature order preserved.
pub fn extract_block<T: Real>(state: &CovarianceState<T>, pair: ModePair) -> Mat4<T> {
    let idx = pair.indices();
    Mat4::from_fn(|i, j| state.full[(idx[i], idx[j])])
}

/// Symplectic form with `[[0, 1], [-1, 0]]` blocks on the diagonal.
pub fn symplectic_form<T: Real>(modes: usize) -> DMatrix<T> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = T::one();
        omega[(2 * k + 1, 2 * k)] = -T::one();
    }
    omega
}

/// Symplectic eigenvalues (ascending, one per mode) from the moduli of the
/// spectrum of `iΩσ`.
pub fn symplectic_spectrum<T: Real, const D: usize>(sigma: &SMatrix<T, D, D>) -> Result<Vec<T>> {
    assert!(D.is_multiple_of(2), "covariance dimension must be even");
    let s = DMatrix::from_iterator(D, D, sigma.iter().copied());
    let m = symplectic_form::<T>(D / 2) * s;
    let mut moduli: Vec<T> = eigenvalues(&m)?
        .into_iter()
        .map(|z| (z.re * z.re + z.im * z.im).sqrt())
        .collect();
    moduli.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(moduli
        .chunks(2)
        .map(|p| (p[0] + p[1]) * lit::<T>(0.5))
        .collect())
}

/// Row-per-line, space-separated, 17 significant digits.
pub fn format_matrix<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> String {
    let mut out = String::new();
    for i in 0..R {
        for j in 0..C {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{:.16e}", m[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix<const R: usize, const C: usize>(
    path: &Path,
    m: &SMatrix<f64, R, C>,
) -> Result<()> {
    std::fs::write(path, format_matrix(m)).map_err(|e| Error::io(path, e))
}
