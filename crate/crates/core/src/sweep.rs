//! One-dimensional parameter sweeps, figure presets and the entanglement
//! threshold search.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::{check_stability, solve_lyapunov, SystemMatrices};
use crate::error::{Error, Result};
use crate::measures::{correlations, CorrelationReport, TwoModeCovariance};
use crate::params::{effective_coupling, DerivedParams, Drive, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    R,
    Xi,
    /// Bath temperature in kelvin.
    Temperature,
    /// γ/κ at fixed κ and fixed cooperativity.
    GammaOverKappa,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 4] =
        [Self::R, Self::Xi, Self::Temperature, Self::GammaOverKappa];

    pub fn name(self) -> &'static str {
        match self {
            Self::R => "r",
            Self::Xi => "xi",
            Self::Temperature => "T",
            Self::GammaOverKappa => "gamma_over_kappa",
        }
    }

    pub fn get(self, p: &PhysicalParams) -> f64 {
        match self {
            Self::R => p.squeezing_r,
            Self::Xi => p.xi(),
            Self::Temperature => p.temperature,
            Self::GammaOverKappa => p.gamma_over_kappa(),
        }
    }

    /// Sets the variable on `p`. Changing γ/κ moves γ and pins the drive to
    /// the cooperativity it had before, so C stays fixed while G adjusts.
    pub fn apply(self, p: &mut PhysicalParams, v: f64) {
        match self {
            Self::R => p.squeezing_r = v,
            Self::Xi => p.hopping_lambda = v * p.kappa,
            Self::Temperature => p.temperature = v,
            Self::GammaOverKappa => {
                let g = effective_coupling(p);
                let c = 4.0 * g * g / (p.gamma * p.kappa);
                p.drive = Drive::Cooperativity(c);
                p.gamma = v * p.kappa;
            }
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r" => Ok(Self::R),
            "xi" => Ok(Self::Xi),
            "T" => Ok(Self::Temperature),
            "gamma_over_kappa" => Ok(Self::GammaOverKappa),
            _ => Err(Error::InvalidSweep(format!(
                "unknown variable `{s}` (expected r, xi, T or gamma_over_kappa)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub held: PhysicalParams,
    pub curves: Option<Curves>,
    /// Free-form `key = value` notes written as CSV comment lines.
    pub metadata: Vec<String>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.start.is_nan() || self.stop.is_nan() || self.start >= self.stop {
            return Err(Error::InvalidSweep(format!(
                "start ({}) must be below stop ({})",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidSweep(format!(
                "need at least 2 points, got {}",
                self.points
            )));
        }
        if let Some(c) = &self.curves {
            if c.variable == self.variable {
                return Err(Error::InvalidSweep(format!(
                    "curve variable `{}` is also the swept variable",
                    c.variable.name()
                )));
            }
            if c.values.is_empty() {
                return Err(Error::InvalidSweep("empty curve list".into()));
            }
        }
        self.held.validate()?;
        Ok(())
    }

    /// Linear grid, endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Parses `var=start:stop:n`.
pub fn parse_sweep_arg(arg: &str) -> Result<(SweepVariable, f64, f64, usize)> {
    let bad = || Error::InvalidSweep(format!("expected `var=start:stop:n`, got `{arg}`"));
    let (var, range) = arg.split_once('=').ok_or_else(bad)?;
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad());
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let n = n.trim().parse::<usize>().map_err(|_| bad())?;
    Ok((var.trim().parse()?, num(a)?, num(b)?, n))
}

/// Parses `var=v1,v2,...`.
pub fn parse_curves_arg(arg: &str) -> Result<Curves> {
    let bad = || Error::InvalidSweep(format!("expected `var=v1,v2,...`, got `{arg}`"));
    let (var, list) = arg.split_once('=').ok_or_else(bad)?;
    let values = list
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Curves {
        variable: var.trim().parse()?,
        values,
    })
}

/// Parses `lo:hi`.
pub fn parse_bracket_arg(arg: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidSweep(format!("expected `lo:hi`, got `{arg}`"));
    let (a, b) = arg.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub curve_value: Option<f64>,
    pub r: f64,
    pub xi: f64,
    pub temperature: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub cooperativity: f64,
    pub n_th: f64,
    /// Mirror block entries σ1, σ12, σ13 from the Lyapunov solution.
    pub sigma: Option<[f64; 3]>,
    pub measures: Option<CorrelationReport<f64>>,
    pub stable: bool,
    pub residual: Option<f64>,
    pub min_symplectic: Option<f64>,
    /// Set when a stable point could not be evaluated.
    pub error: Option<String>,
}

impl SweepRow {
    /// Steering in the stronger direction.
    pub fn steering(&self) -> Option<f64> {
        self.measures.map(|m| m.steering_ab.max(m.steering_ba))
    }

    pub fn log_negativity(&self) -> Option<f64> {
        self.measures.map(|m| m.log_negativity)
    }

    pub fn discord(&self) -> Option<f64> {
        self.measures.map(|m| m.discord)
    }
}

/// Runs the full pipeline at one parameter point. Never fails: problems are
/// recorded on the row.
pub fn evaluate_point(params: &PhysicalParams) -> SweepRow {
    let mut row = SweepRow {
        sweep_value: f64::NAN,
        curve_value: None,
        r: params.squeezing_r,
        xi: params.xi(),
        temperature: params.temperature,
        gamma: params.gamma,
        kappa: params.kappa,
        cooperativity: f64::NAN,
        n_th: f64::NAN,
        sigma: None,
        measures: None,
        stable: false,
        residual: None,
        min_symplectic: None,
        error: None,
    };
    let d = match DerivedParams::<f64>::new(params) {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.cooperativity = d.cooperativity;
    row.n_th = d.n_th;
    let m = SystemMatrices::new(&d);
    match check_stability(&m.drift) {
        Ok(s) if s.is_stable() => row.stable = true,
        Ok(_) => return row,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    let result = solve_lyapunov(&m).and_then(|state| {
        let b = state.mechanical_block;
        row.sigma = Some([b[(0, 0)], b[(0, 1)], b[(0, 2)]]);
        row.residual = Some(state.residual);
        row.min_symplectic = Some(state.min_symplectic);
        correlations(&TwoModeCovariance::new(b)?, true)
    });
    match result {
        Ok(rep) => row.measures = Some(rep),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Evaluates every grid point, in parallel. Row order is curve value first,
/// then the grid ascending, independent of scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid();
    let curve_values: Vec<Option<f64>> = match &spec.curves {
        Some(c) => c.values.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let points: Vec<(Option<f64>, f64)> = curve_values
        .iter()
        .flat_map(|&c| grid.iter().map(move |&x| (c, x)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(c, x)| {
            let mut p = spec.held;
            if let (Some(v), Some(curves)) = (c, &spec.curves) {
                curves.variable.apply(&mut p, v);
            }
            spec.variable.apply(&mut p, x);
            let mut row = evaluate_point(&p);
            row.sweep_value = x;
            row.curve_value = c;
            row
        })
        .collect())
}

pub const PRESETS: [&str; 3] = ["fig2", "fig3", "fig4"];
pub const PRESET_POINTS: usize = 301;

/// Parameter set shared by all presets: the reference membrane with the
/// drive pinned at C = 32.11.
pub fn preset_base() -> PhysicalParams {
    PhysicalParams::reference()
}

pub fn figure_preset(name: &str) -> Result<SweepSpec> {
    let held = preset_base();
    let mut metadata = vec![
        format!("preset = {name}"),
        "drive = cooperativity 32.11".to_string(),
        format!("kappa_rads = {:.16e}", held.kappa),
        format!("omega_m_rads = {:.16e}", held.omega_m),
    ];
    let spec = match name {
        "fig2" => {
            metadata.push(
                "note = C held at 32.11; the figure does not state the drive strength".into(),
            );
            SweepSpec {
                variable: SweepVariable::R,
                start: 0.0,
                stop: 3.0,
                points: PRESET_POINTS,
                held,
                curves: Some(Curves {
                    variable: SweepVariable::Xi,
                    values: vec![0.0, 0.1, 0.2, 0.3],
                }),
                metadata,
            }
        }
        "fig3" => {
            metadata.push("note = gamma varies with kappa fixed; C held at 32.11".into());
            SweepSpec {
                variable: SweepVariable::Temperature,
                start: 1e-6,
                stop: 5e-3,
                points: PRESET_POINTS,
                held,
                curves: Some(Curves {
                    variable: SweepVariable::GammaOverKappa,
                    values: vec![0.001, 0.005, 0.01, 0.05],
                }),
                metadata,
            }
        }
        "fig4" => {
            metadata.push(
                "note = C held at 32.11; the figure does not state the drive strength".into(),
            );
            SweepSpec {
                variable: SweepVariable::Xi,
                start: 0.0,
                stop: 1.0,
                points: PRESET_POINTS,
                held,
                curves: Some(Curves {
                    variable: SweepVariable::Temperature,
                    values: vec![0.5e-4, 1e-4, 2e-4, 4e-4],
                }),
                metadata,
            }
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

/// Threshold below which E_N counts as zero during bisection.
pub const EN_TOL: f64 = 1e-10;
pub const XI_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalXi {
    /// Midpoint of the final bracket.
    pub xi_l: f64,
    /// Largest ξ seen with E_N > tol.
    pub lo: f64,
    /// Smallest ξ seen with E_N ≤ tol.
    pub hi: f64,
    pub en_lo: f64,
    pub en_hi: f64,
    pub iterations: usize,
}

fn log_negativity_at(held: &PhysicalParams, xi: f64) -> Result<f64> {
    let mut p = *held;
    SweepVariable::Xi.apply(&mut p, xi);
    let row = evaluate_point(&p);
    if !row.stable {
        return Err(Error::InvalidSweep(match row.error {
            Some(e) => format!("ξ = {xi}: {e}"),
            None => format!("ξ = {xi} is not a stable point"),
        }));
    }
    match (row.measures, row.error) {
        (Some(m), _) => Ok(m.log_negativity),
        (None, e) => Err(Error::InvalidSweep(format!(
            "ξ = {xi}: {}",
            e.unwrap_or_default()
        ))),
    }
}

/// Bisects for the smallest ξ at which entanglement vanishes. The bracket
/// must have E_N > tol at `lo` and E_N ≤ tol at `hi`.
pub fn find_critical_xi(held: &PhysicalParams, lo: f64, hi: f64) -> Result<CriticalXi> {
    let (mut lo, mut hi) = (lo, hi);
    let mut en_lo = log_negativity_at(held, lo)?;
    let mut en_hi = log_negativity_at(held, hi)?;
    if !(lo < hi && en_lo > EN_TOL && en_hi <= EN_TOL) {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            en_lo,
            en_hi,
        });
    }
    let mut iterations = 0;
    while hi - lo > XI_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        let en = log_negativity_at(held, mid)?;
        if en > EN_TOL {
            lo = mid;
            en_lo = en;
        } else {
            hi = mid;
            en_hi = en;
        }
        iterations += 1;
    }
    Ok(CriticalXi {
        xi_l: 0.5 * (lo + hi),
        lo,
        hi,
        en_lo,
        en_hi,
        iterations,
    })
}

pub fn sweep_columns(variable: SweepVariable, curve: Option<SweepVariable>) -> Vec<String> {
    let mut cols = vec![
        format!("sweep_{}", variable.name()),
        curve.map_or_else(|| "curve".to_string(), |c| format!("curve_{}", c.name())),
    ];
    cols.extend(
        [
            "r",
            "xi",
            "T_K",
            "gamma_rads",
            "kappa_rads",
            "C",
            "n_th",
            "sigma1",
            "sigma12",
            "sigma13",
            "steering",
            "log_negativity",
            "discord",
            "nu_minus",
            "stable",
        ]
        .map(String::from),
    );
    cols
}

fn num(out: &mut String, v: Option<f64>) {
    out.push(',');
    if let Some(v) = v {
        write!(out, "{v:.16e}").unwrap();
    }
}

/// CSV body: header plus one line per row. Unstable or failed points have
/// empty σ and measure fields.
pub fn emit_csv(
    rows: &[SweepRow],
    variable: SweepVariable,
    curve: Option<SweepVariable>,
) -> String {
    let mut out = sweep_columns(variable, curve).join(",");
    out.push('\n');
    for row in rows {
        write!(out, "{:.16e}", row.sweep_value).unwrap();
        num(&mut out, row.curve_value);
        for v in [
            row.r,
            row.xi,
            row.temperature,
            row.gamma,
            row.kappa,
            row.cooperativity,
            row.n_th,
        ] {
            num(&mut out, Some(v));
        }
        let s = row.sigma;
        for k in 0..3 {
            num(&mut out, s.map(|s| s[k]));
        }
        num(&mut out, row.steering());
        num(&mut out, row.log_negativity());
        num(&mut out, row.discord());
        num(&mut out, row.measures.map(|m| m.nu_minus));
        writeln!(out, ",{}", row.stable).unwrap();
    }
    out
}

/// As [`emit_csv`], preceded by `# key = value` metadata lines and followed
/// by one `# error` line per failed point.
pub fn emit_csv_with_metadata(rows: &[SweepRow], spec: &SweepSpec) -> String {
    let mut out = String::new();
    for m in &spec.metadata {
        writeln!(out, "# {m}").unwrap();
    }
    out.push_str(&emit_csv(
        rows,
        spec.variable,
        spec.curves.as_ref().map(|c| c.variable),
    ));
    for (k, row) in rows.iter().enumerate() {
        if let Some(e) = &row.error {
            writeln!(out, "# error row {k}: {e}").unwrap();
        }
    }
    out
}

pub fn write_csv(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Column of a parsed sweep CSV, `None` where the field is empty.
pub fn read_csv_column(text: &str, name: &str) -> Option<Vec<Option<f64>>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next()?.split(',').collect();
    let idx = header.iter().position(|h| *h == name)?;
    lines
        .map(|l| {
            let f = l.split(',').nth(idx)?;
            Some(if f.is_empty() { None } else { f.parse().ok() })
        })
        .collect()
}
