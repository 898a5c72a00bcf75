//! Flat `key = value` parameter files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored. Keys
//! mirror [`PhysicalParams`]; frequencies and rates carry a unit suffix:
//! `_hz` for values quoted as ω/2π (multiplied by 2π on load) or `_rads` for
//! angular values.
//!
//! | key | unit | |
//! |-----|------|---|
//! | `omega_m_hz` / `omega_m_rads` | | mechanical frequency |
//! | `gamma_hz` / `gamma_rads` | | mechanical damping |
//! | `mass` | kg | |
//! | `cavity_length` | m | |
//! | `omega_c_hz` / `omega_c_rads` | | cavity frequency |
//! | `omega_l_hz` / `omega_l_rads` | | laser frequency |
//! | `kappa_hz` / `kappa_rads` | | cavity damping |
//! | `temperature` | K | |
//! | `squeezing_r` | | |
//! | `hopping_lambda_hz` / `hopping_lambda_rads` / `hopping_xi` | | λ, or ξ = λ/κ |
//! | `drive_power` / `cooperativity` | W / – | exactly one |
//! | `detuning_hz` / `detuning_rads` | | optional, defaults to `-omega_m` |
//!
//! When a base parameter set is supplied, keys missing from the file keep
//! the base value.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{Drive, PhysicalParams};

#[derive(Debug, Clone, Copy)]
enum Unit {
    Hz,
    Rads,
    Plain,
}

const RATE_KEYS: [&str; 7] = [
    "omega_m",
    "gamma",
    "omega_c",
    "omega_l",
    "kappa",
    "hopping_lambda",
    "detuning",
];
const PLAIN_KEYS: [&str; 7] = [
    "mass",
    "cavity_length",
    "temperature",
    "squeezing_r",
    "hopping_xi",
    "drive_power",
    "cooperativity",
];

fn classify(key: &str) -> Option<(&str, Unit)> {
    if let Some(stem) = key.strip_suffix("_hz") {
        return RATE_KEYS.contains(&stem).then_some((stem, Unit::Hz));
    }
    if let Some(stem) = key.strip_suffix("_rads") {
        return RATE_KEYS.contains(&stem).then_some((stem, Unit::Rads));
    }
    PLAIN_KEYS.contains(&key).then_some((key, Unit::Plain))
}

/// Parsed values keyed by stem, already converted to SI/rad/s.
fn parse_entries(text: &str) -> Result<BTreeMap<String, (String, f64)>> {
    let mut map: BTreeMap<String, (String, f64)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
            line: idx + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let (stem, unit) = classify(key).ok_or_else(|| Error::ConfigKey {
            key: key.to_string(),
            reason: "unknown key".into(),
        })?;
        let v: f64 = value.parse().map_err(|_| Error::ConfigKey {
            key: key.to_string(),
            reason: format!("`{value}` is not a number"),
        })?;
        let v = match unit {
            Unit::Hz => std::f64::consts::TAU * v,
            Unit::Rads | Unit::Plain => v,
        };
        if let Some((prev, _)) = map.get(stem) {
            return Err(Error::ConfigKey {
                key: key.to_string(),
                reason: format!("duplicates `{prev}`"),
            });
        }
        map.insert(stem.to_string(), (key.to_string(), v));
    }
    Ok(map)
}

/// Builds parameters from config text, falling back to `base` for missing
/// keys. Without a base every key except `detuning_*` is required.
pub fn parse_params(text: &str, base: Option<&PhysicalParams>) -> Result<PhysicalParams> {
    let map = parse_entries(text)?;
    let get = |stem: &str, fallback: Option<f64>| -> Result<f64> {
        match map.get(stem) {
            Some((_, v)) => Ok(*v),
            None => fallback.ok_or_else(|| Error::ConfigKey {
                key: stem.to_string(),
                reason: "missing".into(),
            }),
        }
    };

    let omega_m = get("omega_m", base.map(|b| b.omega_m))?;
    let kappa = get("kappa", base.map(|b| b.kappa))?;

    let hopping_lambda = match (map.get("hopping_lambda"), map.get("hopping_xi")) {
        (Some((k1, _)), Some((k2, _))) => {
            return Err(Error::ConfigKey {
                key: k2.clone(),
                reason: format!("conflicts with `{k1}`"),
            })
        }
        (Some((_, l)), None) => *l,
        (None, Some((_, xi))) => xi * kappa,
        (None, None) => base
            .map(|b| b.xi() * kappa)
            .ok_or_else(|| Error::ConfigKey {
                key: "hopping_lambda".into(),
                reason: "missing (give hopping_lambda_hz, hopping_lambda_rads or hopping_xi)"
                    .into(),
            })?,
    };

    let drive = match (map.get("drive_power"), map.get("cooperativity")) {
        (Some(_), Some(_)) => {
            return Err(Error::ConfigKey {
                key: "cooperativity".into(),
                reason: "drive_power and cooperativity are mutually exclusive".into(),
            })
        }
        (Some((_, p)), None) => Drive::Power(*p),
        (None, Some((_, c))) => Drive::Cooperativity(*c),
        (None, None) => base.map(|b| b.drive).ok_or_else(|| Error::ConfigKey {
            key: "drive_power".into(),
            reason: "missing (give exactly one of drive_power or cooperativity)".into(),
        })?,
    };

    let params = PhysicalParams {
        omega_m,
        gamma: get("gamma", base.map(|b| b.gamma))?,
        mass: get("mass", base.map(|b| b.mass))?,
        cavity_length: get("cavity_length", base.map(|b| b.cavity_length))?,
        omega_c: get("omega_c", base.map(|b| b.omega_c))?,
        omega_l: get("omega_l", base.map(|b| b.omega_l))?,
        kappa,
        temperature: get("temperature", base.map(|b| b.temperature))?,
        squeezing_r: get("squeezing_r", base.map(|b| b.squeezing_r))?,
        hopping_lambda,
        drive,
        detuning: get("detuning", Some(-omega_m))?,
    };
    params.validate()?;
    Ok(params)
}

pub fn load_params(path: &Path, base: Option<&PhysicalParams>) -> Result<PhysicalParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_params(&text, base)
}

/// Complete config text for `params`, rates as `_rads`, 17 significant
/// digits.
pub fn to_config_text(params: &PhysicalParams) -> String {
    let mut out = String::new();
    let mut put = |key: &str, v: f64| writeln!(out, "{key} = {v:.16e}").unwrap();
    put("omega_m_rads", params.omega_m);
    put("gamma_rads", params.gamma);
    put("mass", params.mass);
    put("cavity_length", params.cavity_length);
    put("omega_c_rads", params.omega_c);
    put("omega_l_rads", params.omega_l);
    put("kappa_rads", params.kappa);
    put("temperature", params.temperature);
    put("squeezing_r", params.squeezing_r);
    put("hopping_lambda_rads", params.hopping_lambda);
    match params.drive {
        Drive::Power(p) => put("drive_power", p),
        Drive::Cooperativity(c) => put("cooperativity", c),
    }
    put("detuning_rads", params.detuning);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::hz;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const REFERENCE: &str = "\
# reference membrane experiment
omega_m_hz = 947e3
gamma_hz = 140
mass = 145e-12          # kg
cavity_length = 25e-3
omega_c_hz = 5.26e14
omega_l_hz = 2.82e14
kappa_hz = 14000
temperature = 1e-4

squeezing_r = 1
hopping_xi = 0.2
cooperativity = 32.11
";

    #[test]
    fn reference_file_matches_builtin() {
        let p = parse_params(REFERENCE, None).unwrap();
        let q = PhysicalParams::reference();
        assert_relative_eq!(p.omega_m, q.omega_m);
        assert_relative_eq!(p.gamma, q.gamma);
        assert_relative_eq!(p.kappa, q.kappa);
        assert_relative_eq!(p.hopping_lambda, q.hopping_lambda, max_relative = 1e-15);
        assert_eq!(p.drive, q.drive);
        assert_eq!(p.detuning, -p.omega_m);
    }

    #[test]
    fn rads_and_hz_agree() {
        let a = parse_params("kappa_hz = 14000\n", Some(&PhysicalParams::reference())).unwrap();
        let b = parse_params(
            &format!("kappa_rads = {}\n", hz(14000.0)),
            Some(&PhysicalParams::reference()),
        )
        .unwrap();
        assert_eq!(a.kappa, b.kappa);
    }

    #[test]
    fn errors_name_the_key() {
        let both = format!("{REFERENCE}drive_power = 1e-3\n");
        let err = parse_params(&both, None).unwrap_err().to_string();
        assert!(err.contains("cooperativity"), "{err}");

        let neither = REFERENCE.replace("cooperativity = 32.11", "");
        let err = parse_params(&neither, None).unwrap_err().to_string();
        assert!(err.contains("drive_power"), "{err}");

        let missing = REFERENCE.replace("mass = 145e-12          # kg", "");
        let err = parse_params(&missing, None).unwrap_err().to_string();
        assert!(err.contains("`mass`"), "{err}");

        let err = parse_params("kappa = 3\n", None).unwrap_err().to_string();
        assert!(err.contains("`kappa`") && err.contains("unknown"), "{err}");

        let err = parse_params("kappa_hz = 1\nkappa_rads = 2\n", None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("duplicates"), "{err}");

        let err = parse_params("kappa_hz = fast\n", None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("not a number"), "{err}");

        let err = parse_params("just words\n", None).unwrap_err();
        assert!(matches!(err, Error::ConfigSyntax { line: 1, .. }));

        let bad = REFERENCE.replace("kappa_hz = 14000", "kappa_hz = -5");
        assert!(matches!(
            parse_params(&bad, None),
            Err(Error::InvalidParameter { name: "kappa", .. })
        ));
    }

    proptest! {
        #[test]
        fn text_round_trip(
            t in 0.0..1e-2f64,
            r in 0.0..3.0f64,
            xi in 0.0..1.0f64,
            c in 0.0..100.0f64,
            power in proptest::option::of(1e-6..1.0f64),
        ) {
            let mut p = PhysicalParams::reference();
            p.temperature = t;
            p.squeezing_r = r;
            p.hopping_lambda = xi * p.kappa;
            p.drive = power.map_or(Drive::Cooperativity(c), Drive::Power);
            let back = parse_params(&to_config_text(&p), None).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
