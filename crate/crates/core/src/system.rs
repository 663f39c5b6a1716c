//! Autonomous fractional systems D^α x = f(x) and their linear-feedback
//! controlled counterparts D^α x = f(x) − k ⊙ (x − x_e).

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numkit::Matrix;

/// Default tolerance for `‖f(x)‖_∞` when accepting a point as an equilibrium.
pub const DEFAULT_EQUILIBRIUM_TOL: f64 = 1e-10;

/// Tolerance used by [`SystemDef::controlled`] when checking its target.
pub const CONTROL_TARGET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("fractional order {0} outside (0, 1]")]
    InvalidOrder(f64),
    #[error("gain k{index} = {value} is negative or not finite")]
    InvalidGain { index: usize, value: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("point is not an equilibrium: ‖f(x)‖∞ = {residual:e}")]
    NotEquilibrium { residual: f64 },
}

/// Caputo order α ∈ (0, 1]; α = 1 is the classical derivative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder(f64);

impl FracOrder {
    pub fn new(alpha: f64) -> Result<Self, SystemError> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(SystemError::InvalidOrder(alpha))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }
}

impl fmt::Display for FracOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Diagonal feedback gains k₁..kₙ, all non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector(Vec<f64>);

impl GainVector {
    pub fn new(k: Vec<f64>) -> Result<Self, SystemError> {
        if let Some((index, &value)) = k.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(SystemError::InvalidGain { index: index + 1, value });
        }
        Ok(Self(k))
    }

    /// The same gain on every coordinate.
    pub fn uniform(dim: usize, k: f64) -> Result<Self, SystemError> {
        Self::new(vec![k; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&k| k > 0.0)
    }
}

/// A point x_e with f(x_e) = 0 for some system.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint(Vec<f64>);

impl EquilibriumPoint {
    /// Wraps `x` after checking `‖f(x)‖_∞ <= tol` for `sys`.
    pub fn checked(sys: &SystemDef, x: Vec<f64>, tol: f64) -> Result<Self, SystemError> {
        let residual = sys.residual(&x)?;
        if residual <= tol {
            Ok(Self(x))
        } else {
            Err(SystemError::NotEquilibrium { residual })
        }
    }

    /// Wraps a point that is an equilibrium by construction (closed-form families).
    pub fn from_exact(x: Vec<f64>) -> Self {
        Self(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

type FieldFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> Matrix + Send + Sync;

/// A named autonomous vector field on Rⁿ together with its Jacobian.
///
/// Cloning is cheap; the closures are shared and never mutated, so one
/// definition can drive any number of concurrent integrations.
#[derive(Clone)]
pub struct SystemDef {
    name: String,
    dim: usize,
    field: Arc<FieldFn>,
    jacobian: Arc<JacobianFn>,
}

impl fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemDef").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl SystemDef {
    pub fn new<F, J>(name: impl Into<String>, dim: usize, field: F, jacobian: J) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        J: Fn(&[f64]) -> Matrix + Send + Sync + 'static,
    {
        assert!(dim >= 1, "system dimension must be at least 1");
        Self { name: name.into(), dim, field: Arc::new(field), jacobian: Arc::new(jacobian) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes f(x) into `out`. Both slices must have length `dim`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.field)(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    pub fn jacobian(&self, x: &[f64]) -> Matrix {
        (self.jacobian)(x)
    }

    fn check_dim(&self, got: usize) -> Result<(), SystemError> {
        if got == self.dim {
            Ok(())
        } else {
            Err(SystemError::DimensionMismatch { expected: self.dim, got })
        }
    }

    /// ‖f(x)‖_∞.
    pub fn residual(&self, x: &[f64]) -> Result<f64, SystemError> {
        self.check_dim(x.len())?;
        Ok(self.eval(x).iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    pub fn is_equilibrium(&self, x: &[f64], tol: f64) -> Result<bool, SystemError> {
        if !(tol > 0.0) {
            return Err(SystemError::InvalidTolerance(tol));
        }
        Ok(self.residual(x)? <= tol)
    }

    /// The feedback-controlled system f(x) − k ⊙ (x − x_e), whose Jacobian
    /// is J(x) − diag(k). `x_e` must be an equilibrium of `self`.
    pub fn controlled(&self, k: &GainVector, x_e: &EquilibriumPoint) -> Result<SystemDef, SystemError> {
        self.check_dim(k.len())?;
        self.check_dim(x_e.dim())?;
        let residual = self.residual(x_e.as_slice())?;
        if residual > CONTROL_TARGET_TOL {
            return Err(SystemError::NotEquilibrium { residual });
        }
        let base = self.clone();
        let gains = k.as_slice().to_vec();
        let target = x_e.as_slice().to_vec();
        let field = {
            let base = base.clone();
            let gains = gains.clone();
            move |x: &[f64], out: &mut [f64]| {
                base.eval_into(x, out);
                for i in 0..out.len() {
                    out[i] -= gains[i] * (x[i] - target[i]);
                }
            }
        };
        let jacobian = move |x: &[f64]| {
            let mut j = base.jacobian(x);
            for (i, g) in gains.iter().enumerate() {
                j[(i, i)] -= g;
            }
            j
        };
        Ok(SystemDef::new(format!("{}-controlled", self.name), self.dim, field, jacobian))
    }

    /// Largest entrywise deviation between the analytic Jacobian and a
    /// central-difference estimate at `x`, relative to `max(1, |J_ij|)`.
    pub fn jacobian_fd_error(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let analytic = self.jacobian(x);
        let mut worst: f64 = 0.0;
        let mut xp = x.to_vec();
        for j in 0..n {
            let step = 1e-6 * x[j].abs().max(1.0);
            xp[j] = x[j] + step;
            let fp = self.eval(&xp);
            xp[j] = x[j] - step;
            let fm = self.eval(&xp);
            xp[j] = x[j];
            for i in 0..n {
                let fd = (fp[i] - fm[i]) / (2.0 * step);
                let a = analytic[(i, j)];
                worst = worst.max((fd - a).abs() / a.abs().max(1.0));
            }
        }
        worst
    }
}

/// D^α x = −λx on R¹, whose solution from x(0) = x₀ is x₀·E_α(−λt^α).
pub fn linear_decay(rate: f64) -> SystemDef {
    SystemDef::new("linear-decay", 1, move |x, out| out[0] = -rate * x[0], move |_| Matrix::diag(&[-rate]))
}

/// The zero field on Rⁿ; every point is an equilibrium.
pub fn zero_field(dim: usize) -> SystemDef {
    SystemDef::new("zero", dim, |_, out| out.fill(0.0), move |_| Matrix::zeros(dim))
}

/// The constant field f ≡ c.
pub fn constant_field(c: Vec<f64>) -> SystemDef {
    let dim = c.len();
    SystemDef::new("constant", dim, move |_, out| out.copy_from_slice(&c), move |_| Matrix::zeros(dim))
}

/// The linear field f(x) = A x.
pub fn linear_field(a: Matrix) -> SystemDef {
    let dim = a.dim();
    let jac = a.clone();
    SystemDef::new("linear", dim, move |x, out| out.copy_from_slice(&a.mul_vec(x)), move |_| jac.clone())
}

/// D^α x = x², which blows up in finite time for x₀ > 0.
pub fn quadratic_blowup() -> SystemDef {
    SystemDef::new("quadratic-blowup", 1, |x, out| out[0] = x[0] * x[0], |x| Matrix::diag(&[2.0 * x[0]]))
}
