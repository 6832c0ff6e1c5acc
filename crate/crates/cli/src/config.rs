//! Line-based `key = value` experiment configuration with a strict key
//! surface: every accepted key is documented in the README, unknown or
//! duplicated keys are errors, and all numeric ranges are validated at
//! parse time.

use std::collections::BTreeMap;
use std::fmt;

use expball::euler1d::{BumpProfile, BumpShape, Cadence, Scheme};
use expball::model::{GAMMA_MAX, GAMMA_STRICT_MAX};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    Euler,
    Potential,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileChoice {
    Linear,
    Ramped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndCondition {
    Radius,
    Time,
}

/// Fully resolved experiment configuration. Serialized verbatim into the
/// JSON summary so a report names every knob that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub gamma: f64,
    #[serde(rename = "L")]
    pub wall_speed: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub n_cells: usize,
    pub cfl: f64,
    pub end_condition: EndCondition,
    pub r_end: f64,
    pub t_end: f64,
    pub scheme: String,
    pub solver: SolverChoice,
    pub profile: ProfileChoice,
    pub ramp_duration: f64,
    pub bump_shape: String,
    pub bump_center: f64,
    pub bump_width: f64,
    pub bump_power: u32,
    pub record_cadence: String,
    pub out_dir: String,
    pub seed: u64,
    pub emit_svg: bool,
    pub u_max: f64,
    #[serde(skip)]
    pub cadence: Cadence,
    #[serde(skip)]
    pub scheme_enum: Scheme,
    #[serde(skip)]
    pub bump: BumpProfile,
}

pub const ACCEPTED_KEYS: &[&str] = &[
    "gamma",
    "L",
    "epsilon",
    "delta",
    "n_cells",
    "cfl",
    "r_end",
    "t_end",
    "scheme",
    "solver",
    "profile",
    "ramp_duration",
    "bump_shape",
    "bump_center",
    "bump_width",
    "bump_power",
    "record_dlogr",
    "record_dr",
    "record_steps",
    "out_dir",
    "seed",
    "emit_svg",
    "u_max",
];

/// Parse and validate a configuration. An empty file yields the defaults:
/// `gamma = 1.2`, `L = 0.1`, `epsilon = 0.01`, `delta = 3 (gamma - 1) / 5`,
/// `n_cells = 200`, `cfl = 0.4`, `r_end = 10`, `scheme = muscl_minmod`,
/// `solver = euler`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !ACCEPTED_KEYS.contains(&key.as_str()) {
            return err(format!("line {}: unknown key `{key}`", lineno + 1));
        }
        if let Some((first, _)) = seen.get(&key) {
            return err(format!(
                "line {}: key `{key}` already set on line {first}",
                lineno + 1
            ));
        }
        seen.insert(key, (lineno + 1, value));
    }

    let lookup = |key: &str| seen.get(key).map(|(l, v)| (*l, v.clone()));
    let parse_f64 = |key: &str| -> Result<Option<f64>, ConfigError> {
        match lookup(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).or_else(|_| {
                err(format!("line {line}: value `{v}` for `{key}` is not a number"))
            }),
        }
    };
    let parse_u64 = |key: &str| -> Result<Option<u64>, ConfigError> {
        match lookup(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<u64>().map(Some).or_else(|_| {
                err(format!("line {line}: value `{v}` for `{key}` is not an integer"))
            }),
        }
    };
    let parse_bool = |key: &str| -> Result<Option<bool>, ConfigError> {
        match lookup(key) {
            None => Ok(None),
            Some((line, v)) => match v.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => err(format!("line {line}: value `{v}` for `{key}` is not true/false")),
            },
        }
    };

    let gamma = parse_f64("gamma")?.unwrap_or(1.2);
    if !(gamma > 1.0 && gamma < GAMMA_MAX) {
        return err(format!("gamma must lie in (1, 5/3), got {gamma}"));
    }
    if gamma >= GAMMA_STRICT_MAX {
        eprintln!(
            "warning: gamma = {gamma} sits outside (1, 4/3); the sharp decay statements are not guaranteed there"
        );
    }
    let wall_speed = parse_f64("L")?.unwrap_or(0.1);
    if !(wall_speed > 0.0) {
        return err(format!("L must be positive, got {wall_speed}"));
    }
    let epsilon = parse_f64("epsilon")?.unwrap_or(0.01);
    if !(epsilon >= 0.0) {
        return err(format!("epsilon must be nonnegative, got {epsilon}"));
    }
    let delta_max = 3.0 * (gamma - 1.0) / 5.0;
    let delta = parse_f64("delta")?.unwrap_or(delta_max);
    if !(delta > 0.0 && delta <= delta_max) {
        return err(format!("delta must lie in (0, {delta_max}], got {delta}"));
    }
    let n_cells = match parse_u64("n_cells")?.unwrap_or(200) {
        n if n >= 8 && n <= 1_000_000 => n as usize,
        n => return err(format!("n_cells must lie in [8, 1e6], got {n}")),
    };
    let cfl = parse_f64("cfl")?.unwrap_or(0.4);
    if !(cfl > 0.0 && cfl <= 1.0) {
        return err(format!("cfl must lie in (0, 1], got {cfl}"));
    }

    let r_end_opt = parse_f64("r_end")?;
    let t_end_opt = parse_f64("t_end")?;
    if r_end_opt.is_some() && t_end_opt.is_some() {
        return err("set only one of r_end and t_end");
    }
    let (end_condition, r_end, t_end) = match (r_end_opt, t_end_opt) {
        (_, Some(t)) if t > 0.0 => (EndCondition::Time, f64::NAN, t),
        (_, Some(t)) => return err(format!("t_end must be positive, got {t}")),
        (Some(r), None) if r > 1.0 => (EndCondition::Radius, r, f64::NAN),
        (Some(r), None) => return err(format!("r_end must exceed 1, got {r}")),
        (None, None) => (EndCondition::Radius, 10.0, f64::NAN),
    };

    let scheme_str = lookup("scheme").map(|(_, v)| v).unwrap_or_else(|| "muscl_minmod".into());
    let scheme_enum = match scheme_str.as_str() {
        "muscl_minmod" => Scheme::MusclMinmod,
        "first_order" => Scheme::FirstOrder,
        other => return err(format!("scheme must be muscl_minmod or first_order, got `{other}`")),
    };
    let solver = match lookup("solver").map(|(_, v)| v).as_deref().unwrap_or("euler") {
        "euler" => SolverChoice::Euler,
        "potential" => SolverChoice::Potential,
        "both" => SolverChoice::Both,
        other => return err(format!("solver must be euler, potential, or both, got `{other}`")),
    };
    let profile = match lookup("profile").map(|(_, v)| v).as_deref().unwrap_or("linear") {
        "linear" => ProfileChoice::Linear,
        "ramped" => ProfileChoice::Ramped,
        other => return err(format!("profile must be linear or ramped, got `{other}`")),
    };
    let ramp_duration = parse_f64("ramp_duration")?.unwrap_or(1.0);
    if !(ramp_duration > 0.0 && ramp_duration <= 1.0) {
        return err(format!("ramp_duration must lie in (0, 1], got {ramp_duration}"));
    }

    let bump_shape = lookup("bump_shape").map(|(_, v)| v).unwrap_or_else(|| "poly".into());
    let bump_center = parse_f64("bump_center")?.unwrap_or(0.5);
    let bump_width = parse_f64("bump_width")?.unwrap_or(0.4);
    let bump_power = match parse_u64("bump_power")?.unwrap_or(5) {
        p if p <= 64 => p as u32,
        p => return err(format!("bump_power must be at most 64, got {p}")),
    };
    let shape = match bump_shape.as_str() {
        "poly" => BumpShape::Poly(bump_power),
        "exp" => BumpShape::Exp,
        other => return err(format!("bump_shape must be poly or exp, got `{other}`")),
    };
    let bump = BumpProfile { center: bump_center, width: bump_width, shape }
        .validated()
        .map_err(|e| ConfigError { message: e.to_string() })?;

    let cadence_keys =
        ["record_dlogr", "record_dr", "record_steps"].iter().filter(|k| seen.contains_key(**k));
    if cadence_keys.count() > 1 {
        return err("set at most one of record_dlogr, record_dr, record_steps");
    }
    let (cadence, record_cadence) = if let Some(d) = parse_f64("record_dlogr")? {
        if !(d > 0.0) {
            return err(format!("record_dlogr must be positive, got {d}"));
        }
        (Cadence::DeltaLogR(d), format!("dlogr:{d}"))
    } else if let Some(d) = parse_f64("record_dr")? {
        if !(d > 0.0) {
            return err(format!("record_dr must be positive, got {d}"));
        }
        (Cadence::DeltaR(d), format!("dr:{d}"))
    } else if let Some(k) = parse_u64("record_steps")? {
        if k == 0 {
            return err("record_steps must be positive");
        }
        (Cadence::EverySteps(k as usize), format!("steps:{k}"))
    } else {
        (Cadence::DeltaLogR(0.02), "dlogr:0.02".to_string())
    };

    let out_dir = lookup("out_dir").map(|(_, v)| v).unwrap_or_else(|| "out".into());
    let seed = parse_u64("seed")?.unwrap_or(42);
    let emit_svg = parse_bool("emit_svg")?.unwrap_or(false);
    let u_max = parse_f64("u_max")?.unwrap_or(1e3);
    if !(u_max > 0.0) {
        return err(format!("u_max must be positive, got {u_max}"));
    }

    Ok(ExperimentConfig {
        gamma,
        wall_speed,
        epsilon,
        delta,
        n_cells,
        cfl,
        end_condition,
        r_end,
        t_end,
        scheme: scheme_str,
        solver,
        profile,
        ramp_duration,
        bump_shape,
        bump_center,
        bump_width,
        bump_power,
        record_cadence,
        out_dir,
        seed,
        emit_svg,
        u_max,
        cadence,
        scheme_enum,
        bump,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_yields_documented_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.gamma, 1.2);
        assert_eq!(c.wall_speed, 0.1);
        assert_eq!(c.epsilon, 0.01);
        assert!((c.delta - 0.12).abs() < 1e-15);
        assert_eq!(c.n_cells, 200);
        assert_eq!(c.cfl, 0.4);
        assert_eq!(c.end_condition, EndCondition::Radius);
        assert_eq!(c.r_end, 10.0);
        assert_eq!(c.scheme, "muscl_minmod");
        assert_eq!(c.solver, SolverChoice::Euler);
        assert_eq!(c.cadence, Cadence::DeltaLogR(0.02));
    }

    #[test]
    fn range_violations_name_the_key() {
        let e = parse_config("gamma = 1.7").unwrap_err();
        assert!(e.message.contains("gamma"), "{e}");
        let e = parse_config("cfl = 0").unwrap_err();
        assert!(e.message.contains("cfl"), "{e}");
        let e = parse_config("delta = 0.5").unwrap_err();
        assert!(e.message.contains("delta"), "{e}");
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let e = parse_config("gamna = 1.2").unwrap_err();
        assert!(e.message.contains("unknown key `gamna`"), "{e}");
        let e = parse_config("gamma = 1.2\ngamma = 1.3").unwrap_err();
        assert!(e.message.contains("already set"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_config("gamma = 1.2\ncfl = fast").unwrap_err();
        assert!(e.message.contains("line 2"), "{e}");
        let e = parse_config("\n\nnota-config-line").unwrap_err();
        assert!(e.message.contains("line 3"), "{e}");
    }

    #[test]
    fn comments_and_spacing_are_tolerated() {
        let c = parse_config("# full-line comment\n  gamma = 1.25  # trailing\n\nL=0.2\n").unwrap();
        assert_eq!(c.gamma, 1.25);
        assert_eq!(c.wall_speed, 0.2);
    }

    #[test]
    fn end_conditions_are_exclusive() {
        assert!(parse_config("r_end = 5\nt_end = 2").is_err());
        let c = parse_config("t_end = 2").unwrap();
        assert_eq!(c.end_condition, EndCondition::Time);
        assert_eq!(c.t_end, 2.0);
    }

    #[test]
    fn cadence_keys_are_exclusive() {
        assert!(parse_config("record_dr = 0.1\nrecord_steps = 5").is_err());
        let c = parse_config("record_steps = 7").unwrap();
        assert_eq!(c.cadence, Cadence::EverySteps(7));
    }

    #[test]
    fn bump_support_is_validated() {
        assert!(parse_config("bump_center = 0.9\nbump_width = 0.2").is_err());
        assert!(parse_config("bump_shape = poly\nbump_power = 3").is_err());
        let c = parse_config("bump_shape = exp\nbump_width = 0.25").unwrap();
        assert_eq!(c.bump.shape, BumpShape::Exp);
    }
}
