use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },

    #[error("config key `{key}`: {reason}")]
    ConfigKey { key: String, reason: String },

    #[error("drift matrix is {verdict} (max Re λ = {max_real_part:e}, tolerance {tolerance:e})")]
    Unstable {
        verdict: &'static str,
        max_real_part: f64,
        tolerance: f64,
    },

    #[error("eigenvalue solver did not converge")]
    EigenSolver,

    #[error("singular linear system in {0}")]
    Singular(&'static str),

    #[error("Lyapunov solve rejected: {0}")]
    LyapunovAccuracy(String),

    #[error("unphysical covariance: {0}")]
    Unphysical(String),

    #[error("discord formula only covers det Z <= 0 (got det Z = {det_z:e})")]
    UnsupportedDiscordBranch { det_z: f64 },

    #[error("f(x) is undefined below 1/2 (x = {0})")]
    Domain(f64),

    #[error(
        "symplectic spectrum mismatch: invariant formula gives {formula:?}, iΩσ gives {spectral:?}"
    )]
    SpectrumMismatch {
        formula: (f64, f64),
        spectral: (f64, f64),
    },

    #[error("invalid mode pair: {0}")]
    InvalidModePair(String),

    #[error("noise matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),

    #[error("SDE config: {0}")]
    SdeConfig(String),

    #[error("trajectory {trajectory} diverged at t = {time} (|u| = {norm:e}, limit {limit:e})")]
    Diverged {
        trajectory: usize,
        time: f64,
        norm: f64,
        limit: f64,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("unknown figure preset `{0}` (expected fig2, fig3 or fig4)")]
    UnknownPreset(String),

    #[error("invalid bracket [{lo}, {hi}]: E_N({lo}) = {en_lo:e}, E_N({hi}) = {en_hi:e}; need E_N(lo) > 0 and E_N(hi) = 0")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        en_lo: f64,
        en_hi: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
