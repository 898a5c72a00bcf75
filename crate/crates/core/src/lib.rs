//! Steady-state Gaussian quantum correlations between the two movable mirrors
//! of a pair of Fabry-Pérot cavities that share broadband two-mode squeezed
//! light and exchange photons by hopping.
//!
//! The pipeline for one parameter point is
//!
//! 1. [`params`]: physical inputs to derived rates (thermal occupancy,
//!    squeezed-bath moments, many-photon coupling, cooperativity).
//! 2. [`dynamics`]: drift and diffusion matrices of the linearized quadrature
//!    dynamics, stability test, and the Lyapunov steady-state covariance.
//! 3. [`measures`]: steering, logarithmic negativity and Gaussian discord of
//!    the mechanical two-mode block.
//!
//! [`closedform`] and [`montecarlo`] are independent checks on step 2, and
//! [`sweep`] drives the whole thing over one-dimensional parameter grids.
//!
//! All covariances use the vacuum-variance-1/2 convention: the vacuum state
//! is `I/2` and a two-mode state is entangled iff the smallest symplectic
//! eigenvalue of its partial transpose is below 1/2.
//!
//! The linear algebra is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`). The aliases at the crate root fix it to `f64`, which
//! is what the sweeps, the Monte Carlo oracle and the tolerances quoted in the
//! docs assume.
//!
//! ```
//! use optomech::dynamics::solve_lyapunov;
//! use optomech::measures::correlations;
//! use optomech::{DerivedParams, PhysicalParams, SystemMatrices, TwoModeCovariance};
//!
//! let p = PhysicalParams::reference();
//! let m = SystemMatrices::new(&DerivedParams::new(&p)?);
//! let state = solve_lyapunov(&m)?;
//! let c = correlations(&TwoModeCovariance::new(state.mechanical_block)?, true)?;
//! assert!(c.log_negativity > 0.0);
//! # Ok::<(), optomech::Error>(())
//! ```

pub mod closedform;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod measures;
pub mod montecarlo;
pub mod params;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Real;

/// 8×8 matrix in the quadrature ordering of [`dynamics::QuadratureOrdering`].
pub type Matrix8 = nalgebra::SMatrix<f64, 8, 8>;
/// 4×4 two-mode block.
pub type Matrix4 = nalgebra::SMatrix<f64, 4, 4>;

pub type DerivedParams = params::DerivedParams<f64>;
pub type SystemMatrices = dynamics::SystemMatrices<f64>;
pub type CovarianceState = dynamics::CovarianceState<f64>;
pub type StabilityReport = dynamics::StabilityReport<f64>;
pub type TwoModeCovariance = measures::TwoModeCovariance<f64>;
pub type CorrelationReport = measures::CorrelationReport<f64>;
pub type MechanicalCovarianceClosed = closedform::MechanicalCovarianceClosed<f64>;

pub use params::{Drive, PhysicalParams};
