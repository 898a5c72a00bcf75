use nalgebra::RealField;
use num_traits::ToPrimitive;

/// Scalar type the linear algebra is generic over.
///
/// The associated tolerances are the acceptance thresholds for that
/// precision; the `f64` values are the ones the rest of the crate documents.
pub trait Real: RealField + Copy + ToPrimitive {
    /// Max relative Frobenius residual of a Lyapunov solve.
    const RESIDUAL_TOL: f64;
    /// Max relative asymmetry of the raw Lyapunov solution.
    const ASYMMETRY_TOL: f64;
    /// Slack below 1/2 tolerated on symplectic eigenvalues, and the allowed
    /// disagreement between the two symplectic-spectrum routes.
    const SPECTRUM_TOL: f64;
    /// Magnitude below which a correlation measure is snapped to zero.
    const SNAP_TOL: f64;
}

impl Real for f64 {
    const RESIDUAL_TOL: f64 = 1e-10;
    const ASYMMETRY_TOL: f64 = 1e-10;
    const SPECTRUM_TOL: f64 = 1e-9;
    const SNAP_TOL: f64 = 1e-12;
}

impl Real for f32 {
    const RESIDUAL_TOL: f64 = 1e-4;
    const ASYMMETRY_TOL: f64 = 1e-4;
    const SPECTRUM_TOL: f64 = 1e-3;
    const SNAP_TOL: f64 = 1e-6;
}

/// Lossless-enough conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
