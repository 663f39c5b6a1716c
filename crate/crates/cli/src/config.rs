//! Experiment configuration files.
//!
//! Plain `key = value` lines grouped under `[section]` headers; `#` starts
//! a comment line. Lists are comma separated and reals may be written as
//! fractions such as `2/3`.
//!
//! ```text
//! [system]
//! name = maxwell-bloch-5d-controlled
//! gains = 1.2, 1.2, 0.5, 0.5, 0
//! target = e1 0.4330127018922193 0.25
//!
//! [solver]
//! alpha = 0.65
//! h = 0.01
//! steps = 500
//! predictor_anchor = with_x0
//!
//! [initial]
//! x0 = equilibrium+epsilon 0.01
//!
//! [output]
//! dir = out
//! seed = 0
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use fracdyn_core::solver::{PredictorAnchor, MAX_STEPS};
use fracdyn_core::system::FracOrder;
use fracdyn_maxwell_bloch::EquilibriumFamily;
use num_rational::Rational64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), msg: msg.into() }
}

/// How the initial state is given.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Explicit(Vec<f64>),
    /// The target equilibrium shifted by ε in every component.
    EquilibriumPlusEpsilon(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: String,
    pub alpha: f64,
    pub h: f64,
    pub steps: usize,
    pub x0: InitialState,
    pub gains: Option<Vec<f64>>,
    pub target: Option<EquilibriumFamily>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub predictor_anchor: PredictorAnchor,
}

/// A real number together with its exact rational value when the text
/// denotes one (`0.25`, `-1/8`, `3`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real {
    pub value: f64,
    pub exact: Option<Rational64>,
}

pub fn parse_real(s: &str) -> Result<Real, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
        let d: f64 = den.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
        if d == 0.0 {
            return Err(format!("`{s}` divides by zero"));
        }
        let exact = match (exact_decimal(num.trim()), exact_decimal(den.trim())) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        };
        return Ok(Real { value: n / d, exact });
    }
    let value: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(Real { value, exact: exact_decimal(s) })
}

// Plain decimal literals without exponent, e.g. "-0.125".
fn exact_decimal(s: &str) -> Option<Rational64> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if int.len() + frac.len() > 17 {
        return None;
    }
    let numer: i64 = format!("{int}{frac}").parse().ok()?;
    let denom = 10i64.checked_pow(frac.len() as u32)?;
    let r = Rational64::new(numer, denom);
    Some(if neg { -r } else { r })
}

pub fn parse_list(s: &str) -> Result<Vec<Real>, String> {
    s.split(',').map(parse_real).collect()
}

pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    Ok(parse_list(s)?.into_iter().map(|r| r.value).collect())
}

pub fn parse_target(s: &str) -> Result<EquilibriumFamily, String> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let num = |t: &str| parse_real(t).map(|r| r.value);
    match parts.as_slice() {
        ["e1", m, n] => Ok(EquilibriumFamily::E1 { m: num(m)?, n: num(n)? }),
        ["e2", m] => Ok(EquilibriumFamily::E2 { m: num(m)? }),
        _ => Err(format!("`{s}` is not `e1 <m> <n>` or `e2 <m>`")),
    }
}

pub fn format_target(t: &EquilibriumFamily) -> String {
    match t {
        EquilibriumFamily::E1 { m, n } => format!("e1 {m} {n}"),
        EquilibriumFamily::E2 { m } => format!("e2 {m}"),
    }
}

fn parse_initial(s: &str) -> Result<InitialState, String> {
    if let Some(rest) = s.strip_prefix("equilibrium+epsilon") {
        return Ok(InitialState::EquilibriumPlusEpsilon(parse_real(rest)?.value));
    }
    Ok(InitialState::Explicit(parse_f64_list(s)?))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

type Sections = BTreeMap<String, BTreeMap<String, (usize, String)>>;

fn tokenize(text: &str) -> Result<Sections, ConfigError> {
    let mut sections = Sections::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(ConfigError::Syntax { line: lineno, msg: format!("section [{name}] repeated") });
            }
            sections.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: lineno, msg: format!("expected `key = value`, got `{line}`") });
        };
        let Some(section) = current.as_ref() else {
            return Err(ConfigError::Syntax { line: lineno, msg: "key outside of any section".into() });
        };
        let entry = sections.get_mut(section).expect("section inserted above");
        let key = key.trim().to_string();
        if entry.insert(key.clone(), (lineno, value.trim().to_string())).is_some() {
            return Err(ConfigError::Syntax { line: lineno, msg: format!("key `{key}` repeated") });
        }
    }
    Ok(sections)
}

const KNOWN: &[(&str, &[&str])] = &[
    ("system", &["name", "gains", "target"]),
    ("solver", &["alpha", "h", "steps", "predictor_anchor"]),
    ("initial", &["x0"]),
    ("output", &["dir", "seed"]),
];

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let sections = tokenize(text)?;
        for (name, entries) in &sections {
            let Some((_, keys)) = KNOWN.iter().find(|(s, _)| s == name) else {
                let line = entries.values().map(|(l, _)| *l).min().unwrap_or(0);
                return Err(ConfigError::Syntax { line, msg: format!("unknown section [{name}]") });
            };
            for (key, (line, _)) in entries {
                if !keys.contains(&key.as_str()) {
                    return Err(ConfigError::Syntax { line: *line, msg: format!("unknown key `{key}` in [{name}]") });
                }
            }
        }
        let get = |section: &str, key: &str| sections.get(section).and_then(|s| s.get(key)).map(|(_, v)| v.as_str());

        let system = get("system", "name").ok_or(ConfigError::Missing("system.name"))?.to_string();
        let gains = get("system", "gains").map(parse_f64_list).transpose().map_err(|m| invalid("gains", m))?;
        let target = get("system", "target").map(parse_target).transpose().map_err(|m| invalid("target", m))?;
        let real = |key: &'static str, s: Option<&str>| -> Result<f64, ConfigError> {
            parse_real(s.ok_or(ConfigError::Missing(key))?).map(|r| r.value).map_err(|m| invalid(key, m))
        };
        let alpha = real("solver.alpha", get("solver", "alpha"))?;
        let h = real("solver.h", get("solver", "h"))?;
        let steps = get("solver", "steps")
            .ok_or(ConfigError::Missing("solver.steps"))?
            .parse::<usize>()
            .map_err(|e| invalid("steps", e.to_string()))?;
        let predictor_anchor = match get("solver", "predictor_anchor") {
            None => PredictorAnchor::default(),
            Some(s) => PredictorAnchor::parse(s).ok_or_else(|| invalid("predictor_anchor", format!("`{s}`")))?,
        };
        let x0 = parse_initial(get("initial", "x0").ok_or(ConfigError::Missing("initial.x0"))?)
            .map_err(|m| invalid("x0", m))?;
        let output_dir = PathBuf::from(get("output", "dir").unwrap_or("out"));
        let seed =
            get("output", "seed").map(str::parse::<u64>).transpose().map_err(|e| invalid("seed", e.to_string()))?;

        let cfg =
            Self { system, alpha, h, steps, x0, gains, target, seed: seed.unwrap_or(0), output_dir, predictor_anchor };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        FracOrder::new(self.alpha).map_err(|e| invalid("alpha", e.to_string()))?;
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(invalid("h", "step size must be positive"));
        }
        if self.steps == 0 || self.steps > MAX_STEPS {
            return Err(invalid("steps", format!("must be in 1..={MAX_STEPS}")));
        }
        match &self.x0 {
            InitialState::Explicit(v) if v.is_empty() => return Err(invalid("x0", "empty initial state")),
            InitialState::EquilibriumPlusEpsilon(_) if self.target.is_none() => {
                return Err(invalid("x0", "equilibrium+epsilon needs a target"))
            }
            _ => {}
        }
        Ok(())
    }

    /// The configuration file text; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[system]");
        let _ = writeln!(s, "name = {}", self.system);
        if let Some(g) = &self.gains {
            let _ = writeln!(s, "gains = {}", join(g));
        }
        if let Some(t) = &self.target {
            let _ = writeln!(s, "target = {}", format_target(t));
        }
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "predictor_anchor = {}", self.predictor_anchor.as_str());
        let _ = writeln!(s, "\n[initial]");
        match &self.x0 {
            InitialState::Explicit(v) => {
                let _ = writeln!(s, "x0 = {}", join(v));
            }
            InitialState::EquilibriumPlusEpsilon(e) => {
                let _ = writeln!(s, "x0 = equilibrium+epsilon {e}");
            }
        }
        let _ = writeln!(s, "\n[output]");
        let _ = writeln!(s, "dir = {}", self.output_dir.display());
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}
