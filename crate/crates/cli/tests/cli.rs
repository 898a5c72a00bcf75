use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn reference_conf() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/reference.conf")
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
        .parse()
        .unwrap()
}

#[test]
fn single_point_summary() {
    let o = run(&[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!((value(&text, "log_negativity") - 0.5209203919249904).abs() < 1e-12);
    assert!((value(&text, "sigma1") - 1.8969207660395373).abs() < 1e-12);

    let conf = reference_conf();
    let o2 = run(&["--config", conf.to_str().unwrap()]);
    assert!(o2.status.success(), "{}", stderr(&o2));
    assert!((value(&stdout(&o2), "log_negativity") - 0.5209203919249904).abs() < 1e-12);
}

#[test]
fn figure_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["--figure", "fig2", "--output", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let ta = std::fs::read(&a).unwrap();
    assert_eq!(ta, std::fs::read(&b).unwrap());
    let text = String::from_utf8(ta).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body[0],
        "sweep_r,curve_xi,r,xi,T_K,gamma_rads,kappa_rads,C,n_th,sigma1,sigma12,sigma13,steering,log_negativity,discord,nu_minus,stable"
    );
    assert_eq!(body.len(), 1 + 4 * 301);
    assert!(text.contains("# preset = fig2"));
    assert!(text.ends_with('\n'));
}

#[test]
fn custom_sweep_from_config() {
    let conf = reference_conf();
    let o = run(&[
        "--config",
        conf.to_str().unwrap(),
        "--sweep",
        "T=1e-6:1e-3:5",
        "--curves",
        "xi=0,0.2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("sweep_T,curve_xi,"));
    assert_eq!(text.lines().count(), 1 + 2 * 5);
}

#[test]
fn configuration_errors_exit_nonzero_with_key() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(reference_conf()).unwrap();

    let cases = [
        (format!("{base}drive_power = 1e-3\n"), "cooperativity"),
        (format!("{base}kappa = 3\n"), "kappa"),
        (base.replace("mass = 145e-12\n", ""), "mass"),
        (base.replace("kappa_hz = 14000", "kappa_hz = -1"), "kappa"),
    ];
    for (k, (text, key)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.conf"));
        std::fs::write(&path, text).unwrap();
        let o = run(&["--config", path.to_str().unwrap()]);
        assert!(!o.status.success());
        let err = stderr(&o);
        assert!(err.starts_with("error:") && err.contains(key), "{err}");
    }

    for args in [
        &["--sweep", "r=0:3"][..],
        &["--sweep", "q=0:3:4"],
        &["--sweep", "r=3:0:4"],
        &["--curves", "xi=0,0.1"],
        &["--figure", "fig5"],
        &["--config", "/nonexistent/params.conf"],
        &["--figure", "fig4", "--find-critical-xi", "0:0.1"],
        &["--mc-validate", "--mc-dt", "1.0"],
    ] {
        let o = run(args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn matrix_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = run(&["--dump-matrices", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for (name, n) in [
        ("drift.txt", 8),
        ("noise.txt", 8),
        ("covariance.txt", 8),
        ("mechanical_block.txt", 4),
    ] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), n, "{name}");
        assert!(rows.iter().all(|r| r.len() == n), "{name}");
        if name == "mechanical_block.txt" {
            assert!((rows[0][0] - 1.8969207660395373).abs() < 1e-12);
            assert!((rows[1][3] + 1.497746351754473).abs() < 1e-12);
        }
    }
}

#[test]
fn critical_xi() {
    let o = run(&["--figure", "fig4", "--find-critical-xi", "0:1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let xi: f64 = text
        .strip_prefix("xi_l = ")
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((xi - 0.325023868).abs() < 1e-6, "{text}");
}

#[test]
fn closed_form_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cf.csv");
    let o = run(&["--closed-form-report", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("C,r,xi,gamma_over_kappa,n_th,sigma1_closed,sigma1_lyap,rel_dev_1,"));
    assert!(stderr(&o).contains("sigma1"));
}

#[test]
fn short_monte_carlo_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.csv");
    let o = run(&[
        "--mc-validate",
        "--mc-duration",
        "2000",
        "--mc-trajectories",
        "4",
        "--mc-seed",
        "3",
        "--mc-output",
        path.to_str().unwrap(),
    ]);
    let text = stdout(&o);
    assert!(text.starts_with("monte carlo: "), "{text}{}", stderr(&o));
    assert_eq!(o.status.success(), text.contains(": pass"));
    let report = std::fs::read_to_string(&path).unwrap();
    assert!(report.contains("# rng = ChaCha20"));
    assert!(report.contains("seed = 3,"));
    assert_eq!(
        report.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 36
    );
}
