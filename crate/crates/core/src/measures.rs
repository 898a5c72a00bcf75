//! Gaussian correlation quantifiers of a two-mode covariance
//!
//! ```text
//!     σ = | X   Z |
//!         | Zᵀ  B |
//! ```
//!
//! All three measures depend on σ only through the local symplectic
//! invariants `det X`, `det B`, `det Z` and `det σ`. Values are in nats.

use std::cmp::Ordering;

use nalgebra::{Matrix2, SMatrix};

use crate::dynamics::{symplectic_spectrum, Mat4};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Validated two-mode covariance with cached determinants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance<T: Real> {
    matrix: Mat4<T>,
    pub det_x: T,
    pub det_b: T,
    pub det_z: T,
    pub det_full: T,
}

impl<T: Real> TwoModeCovariance<T> {
    /// Accepts a symmetric (to relative 1e-10 in f64) matrix whose
    /// symplectic eigenvalues are all at least `1/2 - 1e-9`.
    pub fn new(matrix: Mat4<T>) -> Result<Self> {
        let scale = matrix.amax();
        if (matrix - matrix.transpose()).amax() > lit::<T>(T::ASYMMETRY_TOL) * scale {
            return Err(Error::Unphysical(
                "covariance matrix is not symmetric".into(),
            ));
        }
        let matrix = (matrix + matrix.transpose()) * lit::<T>(0.5);
        let det2 = |m: Matrix2<T>| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let cov = Self {
            det_x: det2(matrix.fixed_view::<2, 2>(0, 0).into_owned()),
            det_b: det2(matrix.fixed_view::<2, 2>(2, 2).into_owned()),
            det_z: det2(matrix.fixed_view::<2, 2>(0, 2).into_owned()),
            det_full: matrix.determinant(),
            matrix,
        };
        let (_, nu_minus) = cov.symplectic_pair()?;
        if nu_minus < lit::<T>(0.5 - T::SPECTRUM_TOL) {
            return Err(Error::Unphysical(format!(
                "smallest symplectic eigenvalue {} < 1/2",
                to_f64(nu_minus)
            )));
        }
        Ok(cov)
    }

    /// The symmetric form `[[X, Z], [Zᵀ, X]]` with
    /// `X = [[σ1, σ12], [σ12, σ1]]` and `Z = diag(σ13, -σ13)`.
    pub fn from_mirror_entries(sigma1: T, sigma12: T, sigma13: T) -> Result<Self> {
        let z = T::zero();
        #[rustfmt::skip]
        let m = Mat4::from_row_slice(&[
            sigma1, sigma12, sigma13, z,
            sigma12, sigma1, z, -sigma13,
            sigma13, z, sigma1, sigma12,
            z, -sigma13, sigma12, sigma1,
        ]);
        Self::new(m)
    }

    pub fn matrix(&self) -> &Mat4<T> {
        &self.matrix
    }

    pub fn x_block(&self) -> Matrix2<T> {
        self.matrix.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn b_block(&self) -> Matrix2<T> {
        self.matrix.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn z_block(&self) -> Matrix2<T> {
        self.matrix.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Δ = det X + det B - 2 det Z (partial-transpose invariant).
    pub fn delta_pt(&self) -> T {
        self.det_x + self.det_b - lit::<T>(2.0) * self.det_z
    }

    /// Δ' = det X + det B + 2 det Z (seralian invariant).
    pub fn delta_sympl(&self) -> T {
        self.det_x + self.det_b + lit::<T>(2.0) * self.det_z
    }

    fn symplectic_pair(&self) -> Result<(T, T)> {
        eigen_pair(self.delta_sympl(), self.det_full)
    }
}

/// `(sqrt((Δ + q)/2), sqrt((Δ - q)/2))` with `q = sqrt(Δ² - 4 det σ)`.
///
/// The symmetric states produced by this crate have a degenerate symplectic
/// spectrum, so the discriminant sits on zero and round-off can push it
/// either way. Values within `1e4·ε·Δ²` of zero are snapped to zero; a
/// discriminant below `-1e-9·Δ²` means the input is not a covariance matrix.
fn eigen_pair<T: Real>(delta: T, det: T) -> Result<(T, T)> {
    let four: T = lit(4.0);
    let half: T = lit(0.5);
    let delta2 = delta * delta;
    let mut disc = delta2 - four * det;
    if disc < -lit::<T>(T::SPECTRUM_TOL) * delta2 {
        return Err(Error::Unphysical(format!(
            "complex symplectic eigenvalue (Δ² - 4 det σ = {:e})",
            to_f64(disc)
        )));
    }
    if disc.abs() <= lit::<T>(1e4) * T::default_epsilon() * delta2 {
        disc = T::zero();
    }
    let q = disc.max(T::zero()).sqrt();
    let lo = ((delta - q) * half).max(T::zero());
    Ok((((delta + q) * half).sqrt(), lo.sqrt()))
}

fn snap<T: Real>(x: T) -> T {
    if x.abs() < lit(T::SNAP_TOL) {
        T::zero()
    } else {
        x
    }
}

/// Gaussian steerability in both directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steering<T> {
    pub a_to_b: T,
    pub b_to_a: T,
}

/// `S^{A→B} = max[0, ½ ln(det X / (4 det σ))]`, and the same with `det B`
/// for `B→A`.
pub fn gaussian_steering<T: Real>(cov: &TwoModeCovariance<T>) -> Result<Steering<T>> {
    if cov.det_full.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
        return Err(Error::Unphysical(format!(
            "det σ = {:e} is not positive",
            to_f64(cov.det_full)
        )));
    }
    let one_way = |det_local: T| {
        let s = lit::<T>(0.5) * (det_local / (lit::<T>(4.0) * cov.det_full)).ln();
        snap(s.max(T::zero()))
    };
    Ok(Steering {
        a_to_b: one_way(cov.det_x),
        b_to_a: one_way(cov.det_b),
    })
}

/// Logarithmic negativity `E_N = max[0, -ln 2ν⁻]` and the smallest
/// partially transposed symplectic eigenvalue ν⁻.
pub fn log_negativity<T: Real>(cov: &TwoModeCovariance<T>) -> Result<(T, T)> {
    let (_, nu_minus) = eigen_pair(cov.delta_pt(), cov.det_full)?;
    let en = -(lit::<T>(2.0) * nu_minus).ln();
    Ok((snap(en.max(T::zero())), nu_minus))
}

/// `f(x) = (x+½)ln(x+½) - (x-½)ln(x-½)`, continuous at `x = ½`.
pub fn f_function<T: Real>(x: T) -> Result<T> {
    let half: T = lit(0.5);
    if x < half - lit::<T>(T::SPECTRUM_TOL) || !x.is_finite() {
        return Err(Error::Domain(to_f64(x)));
    }
    let plus = x + half;
    let minus = x - half;
    let tail = if minus > T::zero() {
        minus * minus.ln()
    } else {
        T::zero()
    };
    Ok(plus * plus.ln() - tail)
}

/// δ of the discord formula, for `det Z <= 0`.
pub fn discord_delta<T: Real>(cov: &TwoModeCovariance<T>) -> T {
    let two: T = lit(2.0);
    let sx = cov.det_x.sqrt();
    (sx + two * cov.det_x + two * cov.det_z) / (T::one() + two * sx)
}

/// Gaussian discord `D = f(√det X) - f(ϑ₊) - f(ϑ₋) + f(δ)`.
///
/// Only the `det Z <= 0` branch is implemented; anything else is rejected.
pub fn gaussian_discord<T: Real>(cov: &TwoModeCovariance<T>) -> Result<T> {
    if cov.det_z > lit::<T>(T::SNAP_TOL) * cov.det_x {
        return Err(Error::UnsupportedDiscordBranch {
            det_z: to_f64(cov.det_z),
        });
    }
    let (tp, tm) = symplectic_eigenvalues(cov)?;
    let d = f_function(cov.det_x.sqrt())? - f_function(tp)? - f_function(tm)?
        + f_function(discord_delta(cov))?;
    Ok(snap(d).max(T::zero()))
}

/// Symplectic eigenvalues `(ϑ₊, ϑ₋)` from the invariant Δ', checked against
/// the moduli of the eigenvalues of `iΩσ`.
pub fn symplectic_eigenvalues<T: Real>(cov: &TwoModeCovariance<T>) -> Result<(T, T)> {
    let (tp, tm) = cov.symplectic_pair()?;
    let spectral = symplectic_spectrum(&cov.matrix)?;
    let tol = lit::<T>(T::SPECTRUM_TOL) * tp.max(T::one());
    if (spectral[1] - tp).abs() > tol || (spectral[0] - tm).abs() > tol {
        return Err(Error::SpectrumMismatch {
            formula: (to_f64(tp), to_f64(tm)),
            spectral: (to_f64(spectral[1]), to_f64(spectral[0])),
        });
    }
    Ok((tp, tm))
}

/// Everything known about the mirror–mirror correlations at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport<T> {
    pub steering_ab: T,
    pub steering_ba: T,
    pub log_negativity: T,
    pub discord: T,
    pub nu_minus: T,
    pub theta_plus: T,
    pub theta_minus: T,
    pub delta_disc: T,
    pub delta_pt: T,
    pub delta_sympl: T,
    pub stable: bool,
}

impl<T: Real> CorrelationReport<T> {
    pub fn entangled(&self) -> bool {
        self.log_negativity > T::zero()
    }
}

pub fn correlations<T: Real>(
    cov: &TwoModeCovariance<T>,
    stable: bool,
) -> Result<CorrelationReport<T>> {
    let steering = gaussian_steering(cov)?;
    let (log_negativity, nu_minus) = log_negativity(cov)?;
    let (theta_plus, theta_minus) = symplectic_eigenvalues(cov)?;
    Ok(CorrelationReport {
        steering_ab: steering.a_to_b,
        steering_ba: steering.b_to_a,
        log_negativity,
        discord: gaussian_discord(cov)?,
        nu_minus,
        theta_plus,
        theta_minus,
        delta_disc: discord_delta(cov),
        delta_pt: cov.delta_pt(),
        delta_sympl: cov.delta_sympl(),
        stable,
    })
}

/// Two-mode squeezed vacuum with squeezing `s`: `σ1 = cosh(2s)/2`,
/// `σ13 = sinh(2s)/2`.
pub fn two_mode_squeezed_vacuum<T: Real>(s: T) -> TwoModeCovariance<T> {
    let two: T = lit(2.0);
    let half: T = lit(0.5);
    TwoModeCovariance::from_mirror_entries(
        (two * s).cosh() * half,
        T::zero(),
        (two * s).sinh() * half,
    )
    .expect("two-mode squeezed vacuum is physical")
}

/// Product of two thermal states with occupancy `n`.
pub fn thermal_product<T: Real>(n: T) -> TwoModeCovariance<T> {
    TwoModeCovariance::new(SMatrix::identity() * (n + lit(0.5))).expect("thermal state is physical")
}
