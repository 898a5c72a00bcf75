//! Stochastic cross-check of the steady-state covariance.
//!
//! The fluctuation equations are linear with additive Gaussian noise, so the
//! symmetric-ordered quantum moments coincide with the second moments of the
//! classical process `du = W u dt + dη`, `E[dη dηᵀ] = R dt`. Integrating that
//! process and averaging `u uᵀ` over time and trajectories therefore
//! estimates the same σ the Lyapunov solver returns, through entirely
//! different numerics. Everything runs in the frame rotating at the
//! mechanical frequency, where the noise correlations are time independent.
//!
//! Time is measured in units of 1/κ: the integrator works with `W/κ` and
//! `R/κ`, which leaves the stationary covariance unchanged.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::dynamics::{check_stability, CovarianceState, Mat8, SystemMatrices};
use crate::error::{Error, Result};
use crate::params::DerivedParams;

type Vec8 = SVector<f64, 8>;

/// Generator used for every trajectory, recorded in report metadata.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64 + per-trajectory stream)";

/// Batches per trajectory for the batch-means error estimate.
pub const BATCHES: usize = 8;

/// Integration settings. Durations are in units of 1/κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub burn_in: f64,
    pub sample_duration: f64,
    pub n_trajectories: usize,
    pub seed: u64,
}

impl SdeConfig {
    pub const DEFAULT_DT: f64 = 0.005;
    pub const DEFAULT_TRAJECTORIES: usize = 16;
    pub const DEFAULT_SEED: u64 = 20_240_611;

    /// `dt = 0.005/κ`, `burn_in = 20/γ`, `sample_duration = 200/γ`,
    /// 16 trajectories.
    pub fn default_for(d: &DerivedParams<f64>) -> Self {
        let gk = d.gamma / d.kappa;
        SdeConfig {
            dt: Self::DEFAULT_DT,
            burn_in: 20.0 / gk,
            sample_duration: 200.0 / gk,
            n_trajectories: Self::DEFAULT_TRAJECTORIES,
            seed: Self::DEFAULT_SEED,
        }
    }

    /// Checks the step and burn-in against the rates of `d`.
    pub fn validate(&self, d: &DerivedParams<f64>) -> Result<()> {
        let fastest = [d.kappa, d.gamma, d.coupling, d.lambda]
            .into_iter()
            .fold(0.0, f64::max)
            / d.kappa;
        let slowest = d.gamma.min(d.kappa) / d.kappa;
        let max_dt = 0.01 / fastest;
        let min_burn = 10.0 / slowest;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::SdeConfig(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.dt > max_dt * (1.0 + 1e-12) {
            return Err(Error::SdeConfig(format!(
                "dt = {} exceeds 0.01/max rate = {max_dt}",
                self.dt
            )));
        }
        if self.burn_in < min_burn * (1.0 - 1e-12) {
            return Err(Error::SdeConfig(format!(
                "burn_in = {} is shorter than 10/min(γ, κ) = {min_burn}",
                self.burn_in
            )));
        }
        if self.n_trajectories == 0 {
            return Err(Error::SdeConfig("n_trajectories must be at least 1".into()));
        }
        if self.sample_steps() < BATCHES {
            return Err(Error::SdeConfig(format!(
                "sample_duration = {} gives fewer than {BATCHES} steps",
                self.sample_duration
            )));
        }
        Ok(())
    }

    fn burn_steps(&self) -> usize {
        (self.burn_in / self.dt).ceil() as usize
    }

    fn sample_steps(&self) -> usize {
        (self.sample_duration / self.dt).round() as usize
    }
}

/// `L` with `L Lᵀ = R`. Cholesky when `R` is positive definite, otherwise
/// `V √Λ` from the symmetric eigendecomposition, which covers singular
/// positive semidefinite matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFactor(pub Mat8<f64>);

impl NoiseFactor {
    pub fn new(noise: &Mat8<f64>) -> Result<Self> {
        if let Some(ch) = noise.cholesky() {
            return Ok(NoiseFactor(ch.l()));
        }
        let eig = noise.symmetric_eigen();
        let scale = noise.amax().max(f64::MIN_POSITIVE);
        let min = eig.eigenvalues.min();
        if min < -1e-12 * scale {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        let sqrt_l = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        Ok(NoiseFactor(eig.eigenvectors * Mat8::from_diagonal(&sqrt_l)))
    }
}

fn standard_normals<R: Rng + ?Sized>(rng: &mut R) -> Vec8 {
    Vec8::from_fn(|_, _| rng.sample(StandardNormal))
}

/// One noise increment `√dt · L z` with covariance `R dt`.
pub fn sample_noise_increment<R: Rng + ?Sized>(
    noise: &Mat8<f64>,
    dt: f64,
    rng: &mut R,
) -> Result<SVector<f64, 8>> {
    let factor = NoiseFactor::new(noise)?;
    Ok(increment(&factor, dt, rng))
}

/// As [`sample_noise_increment`] with a precomputed factor.
pub fn increment<R: Rng + ?Sized>(factor: &NoiseFactor, dt: f64, rng: &mut R) -> SVector<f64, 8> {
    if dt == 0.0 {
        return Vec8::zeros();
    }
    factor.0 * standard_normals(rng) * dt.sqrt()
}

/// Ensemble estimate of the stationary covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub cov_estimate: Mat8<f64>,
    /// Standard error per entry from the spread of batch means.
    pub std_error: Mat8<f64>,
    /// Sampled time steps summed over trajectories.
    pub n_samples: usize,
    pub n_batches: usize,
    pub config: SdeConfig,
}

/// Upper-triangle accumulator of `u uᵀ`; symmetric by construction.
#[derive(Clone, Copy)]
struct Moments([f64; 36]);

impl Moments {
    fn zero() -> Self {
        Moments([0.0; 36])
    }

    #[inline]
    fn add_outer(&mut self, u: &Vec8) {
        let mut k = 0;
        for i in 0..8 {
            let ui = u[i];
            for j in i..8 {
                self.0[k] += ui * u[j];
                k += 1;
            }
        }
    }

    fn to_matrix(self, scale: f64) -> Mat8<f64> {
        let mut m = Mat8::zeros();
        let mut k = 0;
        for i in 0..8 {
            for j in i..8 {
                m[(i, j)] = self.0[k] * scale;
                m[(j, i)] = m[(i, j)];
                k += 1;
            }
        }
        m
    }
}

/// Root-mean-square scale of `u` implied by `tr R / (2 min |W_ii|)`; the
/// divergence detector fires at 1e6 times this.
fn expected_norm(w: &Mat8<f64>, r: &Mat8<f64>) -> f64 {
    let decay = (0..8)
        .map(|i| w[(i, i)].abs())
        .fold(f64::INFINITY, f64::min);
    (r.trace() / (2.0 * decay)).sqrt().max(1.0)
}

fn run_trajectory(
    index: usize,
    step: &Mat8<f64>,
    factor: &NoiseFactor,
    config: &SdeConfig,
    limit: f64,
) -> Result<Vec<Mat8<f64>>> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let sqrt_dt = config.dt.sqrt();
    let l = factor.0 * sqrt_dt;
    let mut u = Vec8::zeros();
    let check = |u: &Vec8, n: usize| -> Result<()> {
        let norm = u.norm();
        if norm.is_nan() || norm > limit {
            return Err(Error::Diverged {
                trajectory: index,
                time: n as f64 * config.dt,
                norm,
                limit,
            });
        }
        Ok(())
    };

    let burn = config.burn_steps();
    for n in 0..burn {
        u = step * u + l * standard_normals(&mut rng);
        if n % 1024 == 0 {
            check(&u, n)?;
        }
    }
    check(&u, burn)?;

    let total = config.sample_steps();
    let mut batches = Vec::with_capacity(BATCHES);
    let mut done = 0;
    for b in 0..BATCHES {
        let end = total * (b + 1) / BATCHES;
        let mut acc = Moments::zero();
        for n in done..end {
            u = step * u + l * standard_normals(&mut rng);
            acc.add_outer(&u);
            if n % 1024 == 0 {
                check(&u, burn + n)?;
            }
        }
        check(&u, burn + end)?;
        batches.push(acc.to_matrix(1.0 / (end - done) as f64));
        done = end;
    }
    Ok(batches)
}

/// Euler–Maruyama ensemble estimate of the stationary covariance.
///
/// Trajectories start at `u = 0`, run `burn_in`, then accumulate `u uᵀ`
/// every step for `sample_duration`. Each trajectory owns the ChaCha20
/// stream numbered by its index under the common seed, trajectories run in
/// parallel, and their batch means are reduced in index order, so a fixed
/// config gives bit-identical output regardless of thread count.
pub fn integrate_steady_covariance(
    m: &SystemMatrices<f64>,
    config: &SdeConfig,
) -> Result<McEstimate> {
    let stability = check_stability(&m.drift)?;
    if !stability.is_stable() {
        return Err(Error::Unstable {
            verdict: stability.verdict.as_str(),
            max_real_part: stability.max_real_part,
            tolerance: stability.tolerance,
        });
    }
    let kappa = -2.0 * m.drift[(4, 4)];
    let w = m.drift / kappa;
    let r = m.noise / kappa;
    let factor = NoiseFactor::new(&r)?;
    let step = Mat8::identity() + w * config.dt;
    let limit = 1e6 * expected_norm(&w, &r);

    let per_traj: Vec<Vec<Mat8<f64>>> = (0..config.n_trajectories)
        .into_par_iter()
        .map(|i| run_trajectory(i, &step, &factor, config, limit))
        .collect::<Result<_>>()?;

    let batches: Vec<&Mat8<f64>> = per_traj.iter().flatten().collect();
    let n = batches.len() as f64;
    let mean = batches.iter().fold(Mat8::zeros(), |acc, b| acc + *b) / n;
    let var = batches.iter().fold(Mat8::zeros(), |acc, b| {
        acc + (*b - mean).component_mul(&(*b - mean))
    }) / (n - 1.0).max(1.0);
    Ok(McEstimate {
        cov_estimate: mean,
        std_error: var.map(|v| (v / n).sqrt()),
        n_samples: config.sample_steps() * config.n_trajectories,
        n_batches: batches.len(),
        config: *config,
    })
}

/// Infinite-sample limit of the Euler–Maruyama estimator at step `dt`
/// (units of 1/κ): the solution of `Σ = A Σ Aᵀ + R dt` with `A = I + W dt`.
/// Differs from the Lyapunov solution by O(dt).
pub fn euler_stationary_covariance(m: &SystemMatrices<f64>, dt: f64) -> Result<Mat8<f64>> {
    let kappa = -2.0 * m.drift[(4, 4)];
    let a = Mat8::identity() + m.drift * (dt / kappa);
    let a = DMatrix::from_iterator(8, 8, a.iter().copied());
    let lhs = DMatrix::identity(64, 64) - a.kronecker(&a);
    let rhs = DVector::from_iterator(64, (m.noise * (dt / kappa)).iter().copied());
    let x = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::Singular("discrete Lyapunov system"))?;
    let sigma = Mat8::from_iterator(x.iter().copied());
    Ok((sigma + sigma.transpose()) * 0.5)
}

/// Convenience wrapper building matrices and the default config.
pub fn estimate_default(d: &DerivedParams<f64>) -> Result<McEstimate> {
    let config = SdeConfig::default_for(d);
    config.validate(d)?;
    integrate_steady_covariance(&SystemMatrices::new(d), &config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryCheck {
    pub i: usize,
    pub j: usize,
    pub mc: f64,
    pub exact: f64,
    pub std_error: f64,
    pub z: f64,
    /// `|mc - exact| / max(|exact|, √(σ_ii σ_jj))`.
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McComparison {
    /// The 36 entries of the upper triangle, row-major.
    pub entries: Vec<EntryCheck>,
    pub over_3: usize,
    pub over_4: usize,
    pub max_abs_z: f64,
    pub passed: bool,
}

pub const Z_FAIL: f64 = 4.0;
pub const Z_WARN: f64 = 3.0;
pub const MAX_WARN: usize = 2;

/// NaN counts as exceeding.
fn exceeds(z: f64, limit: f64) -> bool {
    z.is_nan() || z.abs() > limit
}

/// Per-entry z-scores. Passes when no entry exceeds 4 standard errors and at
/// most 2 of the 36 exceed 3.
pub fn compare_to_lyapunov(mc: &McEstimate, exact: &CovarianceState<f64>) -> McComparison {
    compare_matrices(&mc.cov_estimate, &mc.std_error, &exact.full)
}

pub fn compare_matrices(est: &Mat8<f64>, se: &Mat8<f64>, exact: &Mat8<f64>) -> McComparison {
    let mut entries = Vec::with_capacity(36);
    for i in 0..8 {
        for j in i..8 {
            let (mc, ex, s) = (est[(i, j)], exact[(i, j)], se[(i, j)]);
            let diff = mc - ex;
            let z = if diff == 0.0 { 0.0 } else { diff / s };
            let scale = ex.abs().max((exact[(i, i)] * exact[(j, j)]).abs().sqrt());
            entries.push(EntryCheck {
                i,
                j,
                mc,
                exact: ex,
                std_error: s,
                z,
                rel_dev: if diff == 0.0 { 0.0 } else { diff.abs() / scale },
            });
        }
    }
    let over_3 = entries.iter().filter(|e| exceeds(e.z, Z_WARN)).count();
    let over_4 = entries.iter().filter(|e| exceeds(e.z, Z_FAIL)).count();
    let max_abs_z = entries.iter().map(|e| e.z.abs()).fold(0.0, f64::max);
    McComparison {
        entries,
        over_3,
        over_4,
        max_abs_z,
        passed: over_4 == 0 && over_3 <= MAX_WARN,
    }
}

pub const REPORT_COLUMNS: [&str; 7] = ["i", "j", "mc", "lyapunov", "std_error", "z", "rel_dev"];

/// CSV with one row per unique entry, metadata as leading `#` lines.
pub fn report_csv(mc: &McEstimate, cmp: &McComparison) -> String {
    let c = &mc.config;
    let mut out = String::new();
    writeln!(out, "# rng = {RNG_NAME}").unwrap();
    writeln!(
        out,
        "# seed = {}, dt = {:e}/kappa, burn_in = {:e}/kappa, sample_duration = {:e}/kappa, trajectories = {}, batches = {}",
        c.seed, c.dt, c.burn_in, c.sample_duration, c.n_trajectories, mc.n_batches
    )
    .unwrap();
    writeln!(
        out,
        "# over_3sigma = {}, over_4sigma = {}, max_abs_z = {:.6}, passed = {}",
        cmp.over_3, cmp.over_4, cmp.max_abs_z, cmp.passed
    )
    .unwrap();
    writeln!(out, "{}", REPORT_COLUMNS.join(",")).unwrap();
    for e in &cmp.entries {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            e.i, e.j, e.mc, e.exact, e.std_error, e.z, e.rel_dev
        )
        .unwrap();
    }
    out
}

pub fn write_report(path: &Path, mc: &McEstimate, cmp: &McComparison) -> Result<()> {
    std::fs::write(path, report_csv(mc, cmp)).map_err(|e| Error::io(path, e))
}
