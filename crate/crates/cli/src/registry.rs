//! Named systems available from the command line.

use fracdyn_core::numkit::mittag_leffler;
use fracdyn_core::system::{linear_decay, quadratic_blowup, zero_field, GainVector, SystemDef};
use fracdyn_maxwell_bloch::{self as mb, EquilibriumFamily};

use crate::config::{ExperimentConfig, InitialState};
use crate::CliError;

pub const SYSTEMS: &[(&str, &str)] = &[
    (mb::SYSTEM_NAME, "5D Maxwell-Bloch field"),
    (mb::CONTROLLED_NAME, "5D Maxwell-Bloch with feedback gains towards a target equilibrium"),
    ("linear-decay", "D^α x = −x, exact solution x₀E_α(−t^α)"),
    ("zero", "D^α x = 0 in the dimension of x0"),
    ("quadratic-blowup", "D^α x = x², finite-time blow-up for x0 > 0"),
];

pub fn target_point(t: &EquilibriumFamily) -> Result<Vec<f64>, CliError> {
    Ok(mb::mb_equilibria(*t).map_err(|e| CliError::Config(e.to_string()))?.as_slice().to_vec())
}

/// The system `name`, with `dim` used only by dimension-agnostic entries.
pub fn build_system(
    name: &str,
    gains: Option<&[f64]>,
    target: Option<&EquilibriumFamily>,
    dim: usize,
) -> Result<SystemDef, CliError> {
    let sys = match name {
        mb::SYSTEM_NAME => {
            if gains.is_some() {
                return Err(CliError::Config(format!("gains require the `{}` system", mb::CONTROLLED_NAME)));
            }
            mb::system()
        }
        mb::CONTROLLED_NAME => {
            let gains = gains.ok_or_else(|| CliError::Config("controlled system needs gains".into()))?;
            let target = target.ok_or_else(|| CliError::Config("controlled system needs a target".into()))?;
            let k = GainVector::new(gains.to_vec()).map_err(|e| CliError::Config(e.to_string()))?;
            mb::controlled_system(&k, *target).map_err(|e| CliError::Config(e.to_string()))?
        }
        "linear-decay" => linear_decay(1.0),
        "zero" => zero_field(dim.max(1)),
        "quadratic-blowup" => quadratic_blowup(),
        other => {
            let known: Vec<&str> = SYSTEMS.iter().map(|(n, _)| *n).collect();
            return Err(CliError::Config(format!("unknown system `{other}` (known: {})", known.join(", "))));
        }
    };
    Ok(sys)
}

/// The initial state a configuration describes.
pub fn initial_state(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    match &cfg.x0 {
        InitialState::Explicit(v) => Ok(v.clone()),
        InitialState::EquilibriumPlusEpsilon(eps) => {
            let t = cfg.target.as_ref().ok_or_else(|| CliError::Config("equilibrium+epsilon needs a target".into()))?;
            Ok(target_point(t)?.into_iter().map(|v| v + eps).collect())
        }
    }
}

pub fn system_for(cfg: &ExperimentConfig) -> Result<SystemDef, CliError> {
    let x0 = initial_state(cfg)?;
    let sys = build_system(&cfg.system, cfg.gains.as_deref(), cfg.target.as_ref(), x0.len())?;
    if sys.dim() != x0.len() {
        return Err(CliError::Config(format!("x0 has {} components, `{}` needs {}", x0.len(), sys.name(), sys.dim())));
    }
    Ok(sys)
}

/// Exact solution for systems that have one, as a function of t.
pub fn oracle(name: &str, alpha: f64, x0: &[f64]) -> Result<Box<dyn Fn(f64) -> Vec<f64>>, CliError> {
    match name {
        "linear-decay" => {
            let x0 = x0.to_vec();
            Ok(Box::new(move |t: f64| {
                let e = mittag_leffler(alpha, -t.powf(alpha)).expect("argument within the supported range");
                x0.iter().map(|v| v * e).collect()
            }))
        }
        "zero" => {
            let x0 = x0.to_vec();
            Ok(Box::new(move |_| x0.clone()))
        }
        other => Err(CliError::Config(format!("system `{other}` has no exact solution; use linear-decay or zero"))),
    }
}
