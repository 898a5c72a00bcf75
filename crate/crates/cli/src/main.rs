use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use optomech::closedform::{validate_closed_forms, write_report, ClosedFormGrid};
use optomech::config::load_params;
use optomech::dynamics::{solve_lyapunov, write_matrix};
use optomech::montecarlo::{self, SdeConfig};
use optomech::sweep::{
    emit_csv_with_metadata, evaluate_point, figure_preset, find_critical_xi, parse_bracket_arg,
    parse_curves_arg, parse_sweep_arg, run_sweep, SweepSpec, PRESETS,
};
use optomech::{DerivedParams, PhysicalParams, SystemMatrices};

/// Steady-state mirror correlations of two squeezed-light-driven
/// optomechanical cavities coupled by photon hopping.
///
/// Without a sweep the held parameter point is evaluated and summarized.
#[derive(Parser, Debug)]
#[command(name = "optomech", version)]
struct Cli {
    /// Flat `key = value` parameter file. Overlays the preset when combined
    /// with --figure, otherwise must be complete.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Figure preset: fig2, fig3 or fig4. On its own this runs the preset
    /// sweep; next to another action it only supplies the held parameters
    /// unless --sweep or --output is also given.
    #[arg(long, value_parser = PRESETS)]
    figure: Option<String>,

    /// Swept variable and linear grid, `var=start:stop:n` with var one of
    /// r, xi, T, gamma_over_kappa.
    #[arg(long, value_name = "VAR=START:STOP:N")]
    sweep: Option<String>,

    /// Second variable with discrete values, `var=v1,v2,...`.
    #[arg(long, value_name = "VAR=V1,V2,...")]
    curves: Option<String>,

    /// Sweep CSV destination (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,

    /// Write drift, noise, covariance and mirror block of the held point
    /// as text matrices into this directory.
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,

    /// Compare a stochastic ensemble estimate with the Lyapunov solution at
    /// the held point.
    #[arg(long)]
    mc_validate: bool,

    /// Time step in units of 1/κ.
    #[arg(long)]
    mc_dt: Option<f64>,

    #[arg(long)]
    mc_seed: Option<u64>,

    /// Burn-in in units of 1/κ.
    #[arg(long)]
    mc_burn_in: Option<f64>,

    /// Sampling duration in units of 1/κ.
    #[arg(long)]
    mc_duration: Option<f64>,

    #[arg(long)]
    mc_trajectories: Option<usize>,

    /// Per-entry comparison CSV.
    #[arg(long, value_name = "PATH")]
    mc_output: Option<PathBuf>,

    /// Bisect for the hopping strength at which entanglement vanishes,
    /// `lo:hi`.
    #[arg(long, value_name = "LO:HI")]
    find_critical_xi: Option<String>,

    /// Write the closed-form vs Lyapunov discrepancy table.
    #[arg(long, value_name = "PATH")]
    closed_form_report: Option<PathBuf>,
}

fn held_params(cli: &Cli, preset: Option<&SweepSpec>) -> Result<PhysicalParams> {
    let params = match (&cli.config, preset) {
        (Some(path), base) => load_params(path, base.map(|s| &s.held))?,
        (None, Some(spec)) => spec.held,
        (None, None) => PhysicalParams::reference(),
    };
    for w in params.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(params)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let preset = cli.figure.as_deref().map(figure_preset).transpose()?;
    let held = held_params(&cli, preset.as_ref())?;
    let mut ok = true;
    let other_action = cli.mc_validate
        || cli.find_critical_xi.is_some()
        || cli.closed_form_report.is_some()
        || cli.dump_matrices.is_some();
    let preset = preset.filter(|_| !other_action || cli.sweep.is_some() || cli.output.is_some());

    let spec = match (preset, &cli.sweep) {
        (Some(mut spec), sweep) => {
            spec.held = held;
            if let Some(arg) = sweep {
                let (variable, start, stop, points) = parse_sweep_arg(arg)?;
                spec.variable = variable;
                spec.start = start;
                spec.stop = stop;
                spec.points = points;
            }
            Some(spec)
        }
        (None, Some(arg)) => {
            let (variable, start, stop, points) = parse_sweep_arg(arg)?;
            Some(SweepSpec {
                variable,
                start,
                stop,
                points,
                held,
                curves: None,
                metadata: vec![],
            })
        }
        (None, None) => None,
    };

    match spec {
        Some(mut spec) => {
            if let Some(arg) = &cli.curves {
                spec.curves = Some(parse_curves_arg(arg)?);
            }
            let rows = run_sweep(&spec)?;
            write_out(cli.output.as_deref(), &emit_csv_with_metadata(&rows, &spec))?;
        }
        None => {
            if cli.curves.is_some() {
                bail!("--curves needs --sweep or --figure");
            }
            if !other_action || cli.output.is_some() {
                write_out(cli.output.as_deref(), &point_summary(&held))?;
            }
        }
    }

    if let Some(dir) = &cli.dump_matrices {
        dump_matrices(dir, &held)?;
    }

    if let Some(arg) = &cli.find_critical_xi {
        let (lo, hi) = parse_bracket_arg(arg)?;
        let c = find_critical_xi(&held, lo, hi)?;
        println!(
            "xi_l = {:.9} (E_N = {:.3e} at xi = {:.9}, E_N = {:.3e} at xi = {:.9}, {} bisection steps)",
            c.xi_l, c.en_lo, c.lo, c.en_hi, c.hi, c.iterations
        );
    }

    if cli.mc_validate {
        ok &= mc_validate(&cli, &held)?;
    }

    if let Some(path) = &cli.closed_form_report {
        let report = validate_closed_forms(&ClosedFormGrid::standard());
        write_report(path, &report)?;
        for s in &report.summary {
            eprintln!(
                "{}: max relative deviation {:.3e} (corrected {:.3e}){}",
                s.name,
                s.max_rel_dev,
                s.max_rel_dev_corrected,
                if s.depends_on.is_empty() {
                    String::new()
                } else {
                    format!(", varies with {}", s.depends_on.join(", "))
                }
            );
        }
        eprintln!(
            "sigma1 with rates in units of kappa: max relative deviation {:.3e}",
            report.sigma1_kappa_units_max_dev
        );
    }
    Ok(ok)
}

fn point_summary(p: &PhysicalParams) -> String {
    let row = evaluate_point(p);
    let mut lines = vec![
        format!("C = {:.16e}", row.cooperativity),
        format!("n_th = {:.16e}", row.n_th),
        format!("r = {:.16e}", row.r),
        format!("xi = {:.16e}", row.xi),
        format!("stable = {}", row.stable),
    ];
    if let Some([s1, s12, s13]) = row.sigma {
        lines.push(format!("sigma1 = {s1:.16e}"));
        lines.push(format!("sigma12 = {s12:.16e}"));
        lines.push(format!("sigma13 = {s13:.16e}"));
    }
    if let Some(m) = row.measures {
        lines.push(format!("steering_ab = {:.16e}", m.steering_ab));
        lines.push(format!("steering_ba = {:.16e}", m.steering_ba));
        lines.push(format!("log_negativity = {:.16e}", m.log_negativity));
        lines.push(format!("discord = {:.16e}", m.discord));
        lines.push(format!("nu_minus = {:.16e}", m.nu_minus));
    }
    if let Some(e) = row.error {
        lines.push(format!("error = {e}"));
    }
    lines.join("\n") + "\n"
}

fn dump_matrices(dir: &Path, p: &PhysicalParams) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let m = SystemMatrices::new(&DerivedParams::new(p)?);
    write_matrix(&dir.join("drift.txt"), &m.drift)?;
    write_matrix(&dir.join("noise.txt"), &m.noise)?;
    let state = solve_lyapunov(&m)?;
    write_matrix(&dir.join("covariance.txt"), &state.full)?;
    write_matrix(&dir.join("mechanical_block.txt"), &state.mechanical_block)?;
    Ok(())
}

fn mc_validate(cli: &Cli, p: &PhysicalParams) -> Result<bool> {
    let d = DerivedParams::new(p)?;
    let defaults = SdeConfig::default_for(&d);
    let config = SdeConfig {
        dt: cli.mc_dt.unwrap_or(defaults.dt),
        burn_in: cli.mc_burn_in.unwrap_or(defaults.burn_in),
        sample_duration: cli.mc_duration.unwrap_or(defaults.sample_duration),
        n_trajectories: cli.mc_trajectories.unwrap_or(defaults.n_trajectories),
        seed: cli.mc_seed.unwrap_or(defaults.seed),
    };
    config.validate(&d)?;
    let m = SystemMatrices::new(&d);
    let exact = solve_lyapunov(&m)?;
    let mc = montecarlo::integrate_steady_covariance(&m, &config)?;
    let cmp = montecarlo::compare_to_lyapunov(&mc, &exact);
    if let Some(path) = &cli.mc_output {
        montecarlo::write_report(path, &mc, &cmp)?;
    }
    println!(
        "monte carlo: {} (max |z| = {:.3}, {} entries over 3 sigma, {} over 4 sigma, rng {})",
        if cmp.passed { "pass" } else { "FAIL" },
        cmp.max_abs_z,
        cmp.over_3,
        cmp.over_4,
        montecarlo::RNG_NAME
    );
    Ok(cmp.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
