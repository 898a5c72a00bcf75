//! Physical inputs and the derived quantities the linearized dynamics needs.
//!
//! Every frequency and rate is an angular frequency in rad/s. Use
//! [`hz`] to convert values quoted as `ω/2π`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// CODATA 2018 exact/recommended values.
pub mod constants {
    /// Reduced Planck constant (J·s).
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant (J/K).
    pub const K_B: f64 = 1.380_649e-23;
}

/// Angular frequency (rad/s) of a frequency quoted in Hz.
#[inline]
pub fn hz(f: f64) -> f64 {
    TAU * f
}

/// How the cavities are driven: by laser power or directly by the resulting
/// optomechanical cooperativity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    /// Pump power ℘ in W.
    Power(f64),
    /// Dimensionless cooperativity C = 4G²/(γκ).
    Cooperativity(f64),
}

/// Raw experimental inputs for the symmetric two-cavity system; one value
/// serves both cavities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Mechanical angular frequency ω_M.
    pub omega_m: f64,
    /// Mechanical damping rate γ.
    pub gamma: f64,
    /// Mirror mass (kg).
    pub mass: f64,
    /// Cavity length (m).
    pub cavity_length: f64,
    /// Cavity angular frequency ω_c.
    pub omega_c: f64,
    /// Laser angular frequency ω_L.
    pub omega_l: f64,
    /// Cavity damping rate κ.
    pub kappa: f64,
    /// Mechanical bath temperature (K).
    pub temperature: f64,
    /// Squeezing parameter r of the injected two-mode squeezed light.
    pub squeezing_r: f64,
    /// Photon hopping rate λ.
    pub hopping_lambda: f64,
    pub drive: Drive,
    /// Effective detuning Δ'. Red sideband is `-omega_m`.
    pub detuning: f64,
}

/// Soft violations of the rotating-wave regime. These do not block a
/// computation but the results are outside the model's validity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeWarning {
    /// ω_M/κ ≤ 10.
    CavityLinewidth { ratio: f64 },
    /// ω_M/γ ≤ 10.
    MechanicalQuality { ratio: f64 },
}

impl std::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeWarning::CavityLinewidth { ratio } => {
                write!(f, "omega_M/kappa = {ratio:.3} <= 10, RWA is questionable")
            }
            RegimeWarning::MechanicalQuality { ratio } => {
                write!(f, "omega_M/gamma = {ratio:.3} <= 10, RWA is questionable")
            }
        }
    }
}

impl PhysicalParams {
    /// Mirror and cavity parameters of the reference membrane experiment
    /// (ω_M/2π = 947 kHz, γ/2π = 140 Hz, m = 145 ng, L = 25 mm,
    /// ω_c/2π = 5.26×10¹⁴ Hz, ω_L/2π = 2.82×10¹⁴ Hz) with κ = 2π×14 kHz,
    /// T = 0.1 mK, r = 1, ξ = 0.2 and C = 32.11, driven on the red sideband.
    pub fn reference() -> Self {
        let omega_m = hz(947e3);
        let kappa = hz(14_000.0);
        Self {
            omega_m,
            gamma: hz(140.0),
            mass: 145e-12,
            cavity_length: 25e-3,
            omega_c: hz(5.26e14),
            omega_l: hz(2.82e14),
            kappa,
            temperature: 1e-4,
            squeezing_r: 1.0,
            hopping_lambda: 0.2 * kappa,
            drive: Drive::Cooperativity(32.11),
            detuning: -omega_m,
        }
    }

    /// Dimensionless hopping strength ξ = λ/κ.
    pub fn xi(&self) -> f64 {
        self.hopping_lambda / self.kappa
    }

    pub fn gamma_over_kappa(&self) -> f64 {
        self.gamma / self.kappa
    }

    /// Checks the hard invariants and returns the soft RWA warnings.
    pub fn validate(&self) -> Result<Vec<RegimeWarning>> {
        let positive = [
            ("omega_m", self.omega_m),
            ("gamma", self.gamma),
            ("mass", self.mass),
            ("cavity_length", self.cavity_length),
            ("omega_c", self.omega_c),
            ("omega_l", self.omega_l),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let non_negative = [
            ("temperature", self.temperature),
            ("squeezing_r", self.squeezing_r),
            ("hopping_lambda", self.hopping_lambda),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        match self.drive {
            Drive::Power(p) if !(p.is_finite() && p >= 0.0) => {
                return Err(invalid("drive_power", format!("must be >= 0, got {p}")));
            }
            Drive::Cooperativity(c) if !(c.is_finite() && c >= 0.0) => {
                return Err(invalid("cooperativity", format!("must be >= 0, got {c}")));
            }
            _ => {}
        }
        if !self.detuning.is_finite() {
            return Err(invalid("detuning", "must be finite".into()));
        }

        let mut warnings = Vec::new();
        let cavity = self.omega_m / self.kappa;
        if cavity <= 10.0 {
            warnings.push(RegimeWarning::CavityLinewidth { ratio: cavity });
        }
        let mech = self.omega_m / self.gamma;
        if mech <= 10.0 {
            warnings.push(RegimeWarning::MechanicalQuality { ratio: mech });
        }
        Ok(warnings)
    }

    /// Single-photon coupling g = (ω_c/L)·sqrt(ħ/(mω_M)).
    pub fn single_photon_coupling(&self) -> f64 {
        self.omega_c / self.cavity_length * (constants::HBAR / (self.mass * self.omega_m)).sqrt()
    }

    fn power_prefactor(&self) -> f64 {
        // G² = prefactor · ℘
        let d = self.detuning + self.hopping_lambda;
        let oc_l = self.omega_c / self.cavity_length;
        oc_l * oc_l * 2.0 * self.kappa
            / (self.mass * self.omega_m * self.omega_l * (d * d + 0.25 * self.kappa * self.kappa))
    }

    /// Cooperativity C = 4G²/(γκ) produced by pump power `power`.
    pub fn cooperativity_from_power(&self, power: f64) -> f64 {
        4.0 * self.power_prefactor() * power / (self.gamma * self.kappa)
    }

    /// Pump power that produces cooperativity `c`.
    pub fn power_from_cooperativity(&self, c: f64) -> f64 {
        c * self.gamma * self.kappa / (4.0 * self.power_prefactor())
    }

    /// Pump power, whichever way the drive was specified.
    pub fn pump_power(&self) -> f64 {
        match self.drive {
            Drive::Power(p) => p,
            Drive::Cooperativity(c) => self.power_from_cooperativity(c),
        }
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

/// Bose occupancy `1/(exp(ħω/k_BT) - 1)`; exactly zero at T = 0.
pub fn thermal_occupancy(omega_m: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = constants::HBAR * omega_m / (constants::K_B * temperature);
    1.0 / x.exp_m1()
}

/// Many-photon coupling G.
pub fn effective_coupling(params: &PhysicalParams) -> f64 {
    match params.drive {
        Drive::Power(p) => (params.power_prefactor() * p).sqrt(),
        Drive::Cooperativity(c) => (c * params.gamma * params.kappa / 4.0).sqrt(),
    }
}

/// Laser phase φ = -arctan[2(Δ'+λ)/κ] that makes the intracavity mean
/// amplitude purely imaginary.
pub fn drive_phase(params: &PhysicalParams) -> f64 {
    -(2.0 * (params.detuning + params.hopping_lambda) / params.kappa).atan()
}

/// Mean intracavity amplitude c̄ and mean mechanical amplitude b̄ for the
/// symmetric drive with phase [`drive_phase`].
pub fn steady_state_amplitudes(params: &PhysicalParams) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let power = params.pump_power();
    let e = (2.0 * params.kappa * power / (constants::HBAR * params.omega_l)).sqrt();
    let phi = drive_phase(params);
    let denom = Complex64::new(
        0.5 * params.kappa,
        -(params.detuning + params.hopping_lambda),
    );
    let c = i * e * Complex64::from_polar(1.0, phi) / denom;
    let g = params.single_photon_coupling();
    let b = i * g * c.norm_sqr() / Complex64::new(0.5 * params.gamma, params.omega_m);
    (c, b)
}

/// Dimensionless and internal quantities derived from [`PhysicalParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams<T> {
    /// Thermal phonon occupancy.
    pub n_th: T,
    /// Squeezed-bath photon number sinh²r.
    pub n_sq: T,
    /// Squeezed-bath cross moment sinh r cosh r.
    pub m_sq: T,
    /// Many-photon coupling G (rad/s).
    pub coupling: T,
    pub cooperativity: T,
    /// ξ = λ/κ.
    pub xi: T,
    /// Drive phase φ (rad).
    pub phi: T,
    pub gamma: T,
    pub kappa: T,
    /// Hopping rate λ (rad/s).
    pub lambda: T,
    /// γ(n_th + 1/2).
    pub gamma_prime: T,
    /// κ(N_sq + 1/2).
    pub kappa_prime: T,
}

impl<T: Real> DerivedParams<T> {
    pub fn new(params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let coupling = effective_coupling(params);
        let cooperativity = 4.0 * coupling * coupling / (params.gamma * params.kappa);
        let mut d = Self::from_rates(
            params.gamma,
            params.kappa,
            cooperativity,
            params.xi(),
            thermal_occupancy(params.omega_m, params.temperature),
            params.squeezing_r,
        );
        d.coupling = lit(coupling);
        d.phi = lit(drive_phase(params));
        Ok(d)
    }

    /// Builds the derived set straight from rates and dimensionless inputs.
    /// The drive phase is left at zero.
    pub fn from_rates(
        gamma: f64,
        kappa: f64,
        cooperativity: f64,
        xi: f64,
        n_th: f64,
        r: f64,
    ) -> Self {
        let n_sq = r.sinh().powi(2);
        let m_sq = r.sinh() * r.cosh();
        let coupling = (cooperativity * gamma * kappa / 4.0).sqrt();
        Self {
            n_th: lit(n_th),
            n_sq: lit(n_sq),
            m_sq: lit(m_sq),
            coupling: lit(coupling),
            cooperativity: lit(cooperativity),
            xi: lit(xi),
            phi: T::zero(),
            gamma: lit(gamma),
            kappa: lit(kappa),
            lambda: lit(xi * kappa),
            gamma_prime: lit(gamma * (n_th + 0.5)),
            kappa_prime: lit(kappa * (n_sq + 0.5)),
        }
    }

    pub fn squeezing_r(&self) -> T {
        // asinh(sqrt N) recovers r exactly for r >= 0
        self.n_sq.sqrt().asinh()
    }
}
