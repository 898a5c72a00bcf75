//! Closed-form mirror covariance entries and their comparison with the
//! Lyapunov solution.
//!
//! [`closed_sigma`] evaluates the reference closed forms for σ1, σ12, σ13
//! verbatim. The verbatim σ1 carries a `κ² cosh 2r` term, which adds
//! a rate to a squared rate; [`closed_sigma_corrected`] replaces it by
//! `κ cosh 2r`, which is what a symbolic solve of the Lyapunov equation
//! gives. The verbatim σ12 and σ13 already match that solve.
//!
//! The Lyapunov route is authoritative everywhere else in the crate.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamics::{solve_lyapunov, SystemMatrices};
use crate::error::{Error, Result};
use crate::params::{thermal_occupancy, DerivedParams, PhysicalParams};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalCovarianceClosed<T> {
    pub sigma1: T,
    pub sigma12: T,
    pub sigma13: T,
    pub cooperativity: T,
    pub r: T,
    pub xi: T,
    pub gamma: T,
    pub kappa: T,
    pub n_th: T,
}

fn closed_impl<T: Real>(
    c: T,
    r: T,
    xi: T,
    gamma: T,
    kappa: T,
    n_th: T,
    corrected: bool,
) -> MechanicalCovarianceClosed<T> {
    let one = T::one();
    let two: T = lit(2.0);
    let four: T = lit(4.0);
    let eight: T = lit(8.0);
    let (k, g) = (kappa, gamma);
    let thermal = one + two * n_th;
    let ch = (two * r).cosh();
    let sh = (two * r).sinh();
    let kk_xi = four * k * k * xi * xi;
    let sum_sq = k * k + two * k * g + g * g;
    let squeeze_rate = if corrected { k } else { k * k };

    let sigma1 = (c * (g + k) * (g * thermal + squeeze_rate * ch) + thermal * (sum_sq + kk_xi))
        / (two * sum_sq * (c + one) + eight * k * k * xi * xi);
    let shared = (sum_sq + kk_xi) * (c * c + two * c + one + four * xi * xi);
    let sigma12 = k * c * sh * (k * c + g + two * k) * xi / shared;
    let sigma13 = k * c * sh * ((g + k) * (c + one) - four * k * xi * xi) / (two * shared);

    MechanicalCovarianceClosed {
        sigma1,
        sigma12,
        sigma13,
        cooperativity: c,
        r,
        xi,
        gamma,
        kappa,
        n_th,
    }
}

/// Reference closed forms, verbatim. Rates in rad/s.
pub fn closed_sigma<T: Real>(
    c: T,
    r: T,
    xi: T,
    gamma: T,
    kappa: T,
    n_th: T,
) -> MechanicalCovarianceClosed<T> {
    closed_impl(c, r, xi, gamma, kappa, n_th, false)
}

/// Closed forms with the dimensionally consistent `κ cosh 2r` term in σ1.
///
/// Derived symbolically from `Wσ + σWᵀ + R = 0` with `G² = Cγκ/4`,
/// `λ = ξκ`; agrees with [`solve_lyapunov`] to round-off.
pub fn closed_sigma_corrected<T: Real>(
    c: T,
    r: T,
    xi: T,
    gamma: T,
    kappa: T,
    n_th: T,
) -> MechanicalCovarianceClosed<T> {
    closed_impl(c, r, xi, gamma, kappa, n_th, true)
}

/// One point of a closed-form validation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub cooperativity: f64,
    pub r: f64,
    pub xi: f64,
    pub gamma_over_kappa: f64,
    pub n_th: f64,
}

/// Cartesian product of the listed values at fixed κ.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormGrid {
    pub kappa: f64,
    pub points: Vec<GridPoint>,
}

impl ClosedFormGrid {
    pub fn cartesian(
        kappa: f64,
        cs: &[f64],
        rs: &[f64],
        xis: &[f64],
        gks: &[f64],
        n_ths: &[f64],
    ) -> Self {
        let mut points = Vec::new();
        for &cooperativity in cs {
            for &r in rs {
                for &xi in xis {
                    for &gamma_over_kappa in gks {
                        for &n_th in n_ths {
                            points.push(GridPoint {
                                cooperativity,
                                r,
                                xi,
                                gamma_over_kappa,
                                n_th,
                            });
                        }
                    }
                }
            }
        }
        Self { kappa, points }
    }

    /// The grid shipped with the CLI report: the C = 0 and r = 0 lines plus
    /// the figure parameter ranges.
    pub fn standard() -> Self {
        let p = PhysicalParams::reference();
        let n = thermal_occupancy(p.omega_m, 1e-4);
        Self::cartesian(
            p.kappa,
            &[0.0, 1.0, 32.11],
            &[0.0, 0.5, 1.0, 2.0, 3.0],
            &[0.0, 0.1, 0.2, 0.3],
            &[0.001, 0.01, 0.05],
            &[0.0, n],
        )
    }
}

/// `|a - b| / max(|b|, scale)`.
///
/// `scale` is the Lyapunov σ1 at the same point, so entries that vanish
/// structurally are measured against the natural covariance scale rather
/// than against zero.
pub fn relative_deviation(closed: f64, exact: f64, scale: f64) -> f64 {
    let denom = exact.abs().max(scale.abs());
    if denom == 0.0 {
        (closed - exact).abs()
    } else {
        (closed - exact).abs() / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryComparison {
    pub closed: f64,
    pub corrected: f64,
    pub lyapunov: f64,
    pub rel_dev: f64,
    pub rel_dev_corrected: f64,
}

impl EntryComparison {
    fn new(closed: f64, corrected: f64, lyapunov: f64, scale: f64) -> Self {
        Self {
            closed,
            corrected,
            lyapunov,
            rel_dev: relative_deviation(closed, lyapunov, scale),
            rel_dev_corrected: relative_deviation(corrected, lyapunov, scale),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyRow {
    pub point: GridPoint,
    pub sigma1: EntryComparison,
    pub sigma12: EntryComparison,
    pub sigma13: EntryComparison,
}

impl DiscrepancyRow {
    pub fn entries(&self) -> [(&'static str, &EntryComparison); 3] {
        [
            ("sigma1", &self.sigma1),
            ("sigma12", &self.sigma12),
            ("sigma13", &self.sigma13),
        ]
    }
}

/// Per-entry verdict over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EntrySummary {
    pub name: &'static str,
    pub max_rel_dev: f64,
    pub max_rel_dev_corrected: f64,
    /// Printed formula within [`AGREEMENT_TOL`] at every point.
    pub agrees: bool,
    /// Grid parameters along which the verbatim formula's deviation changes,
    /// found by comparing rows that differ in that parameter only.
    pub depends_on: Vec<&'static str>,
}

pub const AGREEMENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub kappa: f64,
    pub rows: Vec<DiscrepancyRow>,
    /// Points where the drift was not stable, with the reason.
    pub skipped: Vec<(GridPoint, String)>,
    pub summary: Vec<EntrySummary>,
    /// Largest deviation of the verbatim σ1 when every rate is expressed in
    /// units of κ, where `κ²` and `κ` coincide.
    pub sigma1_kappa_units_max_dev: f64,
}

impl DiscrepancyReport {
    pub fn all_agree(&self) -> bool {
        self.summary.iter().all(|s| s.agrees)
    }
}

/// Runs both routes over `grid`, skipping unstable points.
pub fn validate_closed_forms(grid: &ClosedFormGrid) -> DiscrepancyReport {
    let kappa = grid.kappa;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut kappa_units = 0.0f64;
    for &pt in &grid.points {
        let gamma = pt.gamma_over_kappa * kappa;
        let d =
            DerivedParams::<f64>::from_rates(gamma, kappa, pt.cooperativity, pt.xi, pt.n_th, pt.r);
        let state = match solve_lyapunov(&SystemMatrices::new(&d)) {
            Ok(s) => s,
            Err(e) => {
                skipped.push((pt, e.to_string()));
                continue;
            }
        };
        let m = &state.mechanical_block;
        let verbatim = closed_sigma(pt.cooperativity, pt.r, pt.xi, gamma, kappa, pt.n_th);
        let fixed = closed_sigma_corrected(pt.cooperativity, pt.r, pt.xi, gamma, kappa, pt.n_th);
        let scale = m[(0, 0)];
        let unit = closed_sigma(
            pt.cooperativity,
            pt.r,
            pt.xi,
            pt.gamma_over_kappa,
            1.0,
            pt.n_th,
        );
        kappa_units = kappa_units.max(relative_deviation(unit.sigma1, m[(0, 0)], scale));
        rows.push(DiscrepancyRow {
            point: pt,
            sigma1: EntryComparison::new(verbatim.sigma1, fixed.sigma1, m[(0, 0)], scale),
            sigma12: EntryComparison::new(verbatim.sigma12, fixed.sigma12, m[(0, 1)], scale),
            sigma13: EntryComparison::new(verbatim.sigma13, fixed.sigma13, m[(0, 2)], scale),
        });
    }
    let summary = summarize(&rows);
    DiscrepancyReport {
        kappa,
        rows,
        skipped,
        summary,
        sigma1_kappa_units_max_dev: kappa_units,
    }
}

fn summarize(rows: &[DiscrepancyRow]) -> Vec<EntrySummary> {
    type Getter = fn(&GridPoint) -> f64;
    let params: [(&'static str, Getter); 5] = [
        ("C", |p| p.cooperativity),
        ("r", |p| p.r),
        ("xi", |p| p.xi),
        ("gamma_over_kappa", |p| p.gamma_over_kappa),
        ("n_th", |p| p.n_th),
    ];
    (0..3)
        .map(|k| {
            let entry = |row: &DiscrepancyRow| *row.entries()[k].1;
            let name = rows
                .first()
                .map_or(["sigma1", "sigma12", "sigma13"][k], |r| r.entries()[k].0);
            let max_rel_dev = rows.iter().map(|r| entry(r).rel_dev).fold(0.0, f64::max);
            let max_rel_dev_corrected = rows
                .iter()
                .map(|r| entry(r).rel_dev_corrected)
                .fold(0.0, f64::max);
            let agrees = max_rel_dev < AGREEMENT_TOL;
            let mut depends_on = Vec::new();
            if !agrees {
                for (pname, get) in params {
                    let others_equal = |a: &GridPoint, b: &GridPoint| {
                        params
                            .iter()
                            .filter(|(n, _)| *n != pname)
                            .all(|(_, g)| g(a) == g(b))
                    };
                    let varies = rows.iter().enumerate().any(|(i, a)| {
                        rows[i + 1..].iter().any(|b| {
                            get(&a.point) != get(&b.point) && others_equal(&a.point, &b.point) && {
                                let (x, y) = (entry(a).rel_dev, entry(b).rel_dev);
                                (x - y).abs() > 1e-6 * x.abs().max(y.abs())
                            }
                        })
                    });
                    if varies {
                        depends_on.push(pname);
                    }
                }
            }
            EntrySummary {
                name,
                max_rel_dev,
                max_rel_dev_corrected,
                agrees,
                depends_on,
            }
        })
        .collect()
}

pub const REPORT_COLUMNS: [&str; 20] = [
    "C",
    "r",
    "xi",
    "gamma_over_kappa",
    "n_th",
    "sigma1_closed",
    "sigma1_lyap",
    "rel_dev_1",
    "sigma12_closed",
    "sigma12_lyap",
    "rel_dev_12",
    "sigma13_closed",
    "sigma13_lyap",
    "rel_dev_13",
    "sigma1_corrected",
    "rel_dev_1_corrected",
    "sigma12_corrected",
    "rel_dev_12_corrected",
    "sigma13_corrected",
    "rel_dev_13_corrected",
];

/// The report as CSV: a header, one row per solved point, then `#` comment
/// lines with skipped points and the per-entry summary.
pub fn report_csv(report: &DiscrepancyReport) -> String {
    let mut out = REPORT_COLUMNS.join(",");
    out.push('\n');
    for row in &report.rows {
        let p = &row.point;
        let mut fields = vec![p.cooperativity, p.r, p.xi, p.gamma_over_kappa, p.n_th];
        for (_, e) in row.entries() {
            fields.extend([e.closed, e.lyapunov, e.rel_dev]);
        }
        for (_, e) in row.entries() {
            fields.extend([e.corrected, e.rel_dev_corrected]);
        }
        let line: Vec<String> = fields.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    for (p, why) in &report.skipped {
        writeln!(
            out,
            "# skipped C={} r={} xi={} gamma_over_kappa={} n_th={}: {why}",
            p.cooperativity, p.r, p.xi, p.gamma_over_kappa, p.n_th
        )
        .unwrap();
    }
    for s in &report.summary {
        writeln!(
            out,
            "# {}: verbatim formula {} (max rel dev {:.3e}; depends on: {}); corrected max rel dev {:.3e}",
            s.name,
            if s.agrees { "agrees" } else { "DISAGREES" },
            s.max_rel_dev,
            if s.depends_on.is_empty() { "-".to_string() } else { s.depends_on.join(" ") },
            s.max_rel_dev_corrected
        )
        .unwrap();
    }
    writeln!(
        out,
        "# sigma1: verbatim formula with rates in units of kappa, max rel dev {:.3e}",
        report.sigma1_kappa_units_max_dev
    )
    .unwrap();
    out
}

pub fn write_report(path: &Path, report: &DiscrepancyReport) -> Result<()> {
    std::fs::write(path, report_csv(report)).map_err(|e| Error::io(path, e))
}
