//! Adams-Bashforth-Moulton predictor-corrector for Caputo initial value
//! problems D^α x = f(x), x(0) = x₀, with α ∈ (0, 1].
//!
//! The problem is equivalent to the Volterra equation
//!
//! ```text
//! x(t) = x₀ + 1/Γ(α) ∫₀ᵗ (t − s)^{α−1} f(x(s)) ds
//! ```
//!
//! On the uniform mesh t_n = n·h the predictor applies a product rectangle
//! rule to that integral and the corrector a product trapezoidal rule:
//!
//! ```text
//! x_p[n+1] = x₀ + h^α/(αΓ(α))  Σ_{j=0}^{n} b[j,n+1] F[j]
//! x[n+1]   = x₀ + h^α/Γ(α+2) ( Σ_{j=0}^{n} a[j,n+1] F[j] + F(x_p[n+1]) )
//!
//! b[j,n+1] = (n+1−j)^α − (n−j)^α
//! a[0,n+1] = n^{α+1} − (n−α)(n+1)^α
//! a[j,n+1] = (n−j+2)^{α+1} + (n−j)^{α+1} − 2(n−j+1)^{α+1},  1 ≤ j ≤ n
//! ```
//!
//! The whole history enters every step, so a run costs O(N²) weighted sums
//! but only N + 1 corrector-field evaluations (each F[j] is cached).
//! Expected accuracy is O(h^{1+α}) at fixed t > 0 for smooth data.

use thiserror::Error;

use crate::numkit::gamma;
use crate::system::{FracOrder, SystemDef};

/// Upper bound on the number of steps of one run.
pub const MAX_STEPS: usize = 1_000_000;

// History length above which weighted sums switch to pairwise summation.
const PAIRWISE_THRESHOLD: usize = 10_000;
const PAIRWISE_BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state has dimension {got}, system expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weight index j = {j} outside 0..={n}")]
    IndexOutOfRange { j: usize, n: usize },
    #[error("non-finite {stage} value at step {step} (t = {time})")]
    NonFinite { step: usize, time: f64, stage: &'static str },
}

/// How the predictor line is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PredictorAnchor {
    /// x_p[n+1] = x₀ + h^α/(αΓ(α)) Σ b F, the standard scheme.
    #[default]
    WithX0,
    /// x_p[n+1] = h^α/(αΓ(α)) Σ b F, without the initial value.
    AsPrinted,
}

impl PredictorAnchor {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictorAnchor::WithX0 => "with_x0",
            PredictorAnchor::AsPrinted => "as_printed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "with_x0" => Some(PredictorAnchor::WithX0),
            "as_printed" => Some(PredictorAnchor::AsPrinted),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha: FracOrder,
    pub h: f64,
    pub steps: usize,
    pub x0: Vec<f64>,
    pub anchor: PredictorAnchor,
}

impl SolverConfig {
    pub fn new(alpha: FracOrder, h: f64, steps: usize, x0: Vec<f64>) -> Result<Self, SolverError> {
        let cfg = Self { alpha, h, steps, x0, anchor: PredictorAnchor::WithX0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_anchor(mut self, anchor: PredictorAnchor) -> Self {
        self.anchor = anchor;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(SolverError::InvalidConfig(format!("step size must be positive, got {}", self.h)));
        }
        if self.steps == 0 || self.steps > MAX_STEPS {
            return Err(SolverError::InvalidConfig(format!(
                "step count must be in 1..={MAX_STEPS}, got {}",
                self.steps
            )));
        }
        if self.x0.is_empty() || self.x0.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::InvalidConfig("initial state must be non-empty and finite".into()));
        }
        Ok(())
    }

    /// τ = N·h.
    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.h
    }
}

/// Time-indexed states x[0..=N] on a uniform mesh, optionally with the
/// predictor values x_p[1..=N].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    h: f64,
    states: Vec<f64>,
    predictor: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Number of stored states, N + 1.
    pub fn len(&self) -> usize {
        self.states.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// t_j = j·h.
    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    pub fn state(&self, j: usize) -> &[f64] {
        &self.states[j * self.dim..(j + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// x_p[j] for 1 ≤ j ≤ N, when the run kept predictor values.
    pub fn predictor_state(&self, j: usize) -> Option<&[f64]> {
        let p = self.predictor.as_ref()?;
        if j == 0 || j >= self.len() {
            return None;
        }
        Some(&p[(j - 1) * self.dim..j * self.dim])
    }

    /// The i-th coordinate over time.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states().map(|x| x[i]).collect()
    }
}

fn check_index(j: usize, n: usize) -> Result<(), SolverError> {
    if j > n {
        Err(SolverError::IndexOutOfRange { j, n })
    } else {
        Ok(())
    }
}

/// Predictor weight b[j, n+1] = (n+1−j)^α − (n−j)^α.
pub fn predictor_weight(j: usize, n: usize, alpha: FracOrder) -> Result<f64, SolverError> {
    check_index(j, n)?;
    let a = alpha.value();
    Ok(((n + 1 - j) as f64).powf(a) - ((n - j) as f64).powf(a))
}

/// Corrector weight a[j, n+1].
pub fn corrector_weight(j: usize, n: usize, alpha: FracOrder) -> Result<f64, SolverError> {
    check_index(j, n)?;
    let a = alpha.value();
    let n_f = n as f64;
    if j == 0 {
        return Ok(n_f.powf(a + 1.0) - (n_f - a) * (n_f + 1.0).powf(a));
    }
    let k = (n - j) as f64;
    Ok((k + 2.0).powf(a + 1.0) + k.powf(a + 1.0) - 2.0 * (k + 1.0).powf(a + 1.0))
}

/// Cached powers k^α and k^{α+1}, from which every weight of a run is read.
///
/// Entries are computed with the same expressions as [`predictor_weight`]
/// and [`corrector_weight`], so cached and direct weights agree bitwise.
#[derive(Debug, Clone)]
pub struct AbmWeights {
    alpha: f64,
    pow_a: Vec<f64>,
    pow_a1: Vec<f64>,
}

impl AbmWeights {
    /// Weights for steps up to n + 1 = `steps`.
    pub fn new(alpha: FracOrder, steps: usize) -> Self {
        let a = alpha.value();
        let pow_a = (0..=steps + 1).map(|k| (k as f64).powf(a)).collect();
        let pow_a1 = (0..=steps + 1).map(|k| (k as f64).powf(a + 1.0)).collect();
        Self { alpha: a, pow_a, pow_a1 }
    }

    #[inline]
    pub fn b(&self, j: usize, n: usize) -> f64 {
        self.pow_a[n + 1 - j] - self.pow_a[n - j]
    }

    #[inline]
    pub fn a(&self, j: usize, n: usize) -> f64 {
        if j == 0 {
            self.pow_a1[n] - (n as f64 - self.alpha) * self.pow_a[n + 1]
        } else {
            let k = n - j;
            self.pow_a1[k + 2] + self.pow_a1[k] - 2.0 * self.pow_a1[k + 1]
        }
    }
}

/// Incremental integrator state: the accepted history and cached F values.
pub struct AbmStepper<'a> {
    sys: &'a SystemDef,
    cfg: &'a SolverConfig,
    weights: AbmWeights,
    dim: usize,
    states: Vec<f64>,
    fvals: Vec<f64>,
    predictor: Option<Vec<f64>>,
    pred_coeff: f64,
    corr_coeff: f64,
}

impl<'a> AbmStepper<'a> {
    pub fn new(sys: &'a SystemDef, cfg: &'a SolverConfig, keep_predictor: bool) -> Result<Self, SolverError> {
        cfg.validate()?;
        let dim = sys.dim();
        if cfg.x0.len() != dim {
            return Err(SolverError::DimensionMismatch { expected: dim, got: cfg.x0.len() });
        }
        let a = cfg.alpha.value();
        let ha = cfg.h.powf(a);
        // αΓ(α) = Γ(α+1)
        let pred_coeff = ha / gamma(a + 1.0).expect("α + 1 > 0");
        let corr_coeff = ha / gamma(a + 2.0).expect("α + 2 > 0");

        let mut states = Vec::with_capacity((cfg.steps + 1) * dim);
        states.extend_from_slice(&cfg.x0);
        let f0 = sys.eval(&cfg.x0);
        if f0.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { step: 0, time: 0.0, stage: "field" });
        }
        let mut fvals = Vec::with_capacity((cfg.steps + 1) * dim);
        fvals.extend_from_slice(&f0);
        Ok(Self {
            sys,
            cfg,
            weights: AbmWeights::new(cfg.alpha, cfg.steps),
            dim,
            states,
            fvals,
            predictor: keep_predictor.then(|| Vec::with_capacity(cfg.steps * dim)),
            pred_coeff,
            corr_coeff,
        })
    }

    /// Index n of the last accepted state.
    pub fn current(&self) -> usize {
        self.states.len() / self.dim - 1
    }

    pub fn state(&self, j: usize) -> &[f64] {
        &self.states[j * self.dim..(j + 1) * self.dim]
    }

    /// Advances from x[n] to x[n+1] and returns (x_p[n+1], x[n+1]).
    pub fn step(&mut self) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
        let n = self.current();
        if n >= self.cfg.steps {
            return Err(SolverError::InvalidConfig(format!("all {} steps already taken", self.cfg.steps)));
        }
        let next = n + 1;
        let time = next as f64 * self.cfg.h;
        let dim = self.dim;
        let x0 = &self.cfg.x0;

        let b_sum = weighted_history_sum(&self.fvals, dim, n, |j| self.weights.b(j, n));
        let xp: Vec<f64> = (0..dim)
            .map(|i| {
                let anchor = match self.cfg.anchor {
                    PredictorAnchor::WithX0 => x0[i],
                    PredictorAnchor::AsPrinted => 0.0,
                };
                anchor + self.pred_coeff * b_sum[i]
            })
            .collect();
        let fp = self.sys.eval(&xp);
        if fp.iter().chain(&xp).any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { step: next, time, stage: "predictor" });
        }

        let a_sum = weighted_history_sum(&self.fvals, dim, n, |j| self.weights.a(j, n));
        let x: Vec<f64> = (0..dim).map(|i| x0[i] + self.corr_coeff * (a_sum[i] + fp[i])).collect();
        let fx = self.sys.eval(&x);
        if fx.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { step: next, time, stage: "corrector" });
        }

        self.states.extend_from_slice(&x);
        self.fvals.extend_from_slice(&fx);
        if let Some(p) = self.predictor.as_mut() {
            p.extend_from_slice(&xp);
        }
        Ok((xp, x))
    }

    pub fn into_trajectory(self) -> Trajectory {
        Trajectory { dim: self.dim, h: self.cfg.h, states: self.states, predictor: self.predictor }
    }
}

// Σ_{j=0}^{n} w(j) F[j], componentwise.
fn weighted_history_sum(fvals: &[f64], dim: usize, n: usize, w: impl Fn(usize) -> f64 + Copy) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    if n < PAIRWISE_THRESHOLD {
        accumulate(fvals, dim, 0, n + 1, w, &mut out);
    } else {
        pairwise(fvals, dim, 0, n + 1, w, &mut out);
    }
    out
}

fn accumulate(fvals: &[f64], dim: usize, lo: usize, hi: usize, w: impl Fn(usize) -> f64, out: &mut [f64]) {
    for j in lo..hi {
        let wj = w(j);
        let f = &fvals[j * dim..(j + 1) * dim];
        for (o, fi) in out.iter_mut().zip(f) {
            *o += wj * fi;
        }
    }
}

fn pairwise(fvals: &[f64], dim: usize, lo: usize, hi: usize, w: impl Fn(usize) -> f64 + Copy, out: &mut [f64]) {
    if hi - lo <= PAIRWISE_BLOCK {
        accumulate(fvals, dim, lo, hi, w, out);
        return;
    }
    let mid = lo + (hi - lo) / 2;
    let mut left = vec![0.0; dim];
    let mut right = vec![0.0; dim];
    pairwise(fvals, dim, lo, mid, w, &mut left);
    pairwise(fvals, dim, mid, hi, w, &mut right);
    for i in 0..dim {
        out[i] += left[i] + right[i];
    }
}

/// Runs the scheme for `cfg.steps` steps.
pub fn integrate(sys: &SystemDef, cfg: &SolverConfig, keep_predictor: bool) -> Result<Trajectory, SolverError> {
    let mut stepper = AbmStepper::new(sys, cfg, keep_predictor)?;
    for _ in 0..cfg.steps {
        stepper.step()?;
    }
    Ok(stepper.into_trajectory())
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub steps: usize,
    /// Max error over the mesh nodes shared by every run (the coarsest mesh).
    pub max_error: f64,
    /// Max error over this run's own mesh, including the first step.
    pub max_error_full: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of ln(max_error) against ln(h); `None` when fewer
    /// than two rows are available or some error is exactly zero.
    pub slope: Option<f64>,
    /// RMS residual of that fit.
    pub residual: Option<f64>,
    /// Same fit on `max_error_full`.
    pub slope_full: Option<f64>,
}

/// Empirical order of accuracy against an exact solution `oracle(t)`.
///
/// Every step size must divide the largest one and the horizon `tau`, so
/// that all runs share the nodes of the coarsest mesh. Errors are measured
/// in the max norm over those shared nodes, which keeps the comparison at
/// fixed times; the full-mesh maximum is reported alongside because for
/// α < 1 it is dominated by the first step.
pub fn convergence_order(
    sys: &SystemDef,
    alpha: FracOrder,
    x0: &[f64],
    tau: f64,
    oracle: &dyn Fn(f64) -> Vec<f64>,
    h_list: &[f64],
) -> Result<ConvergenceReport, SolverError> {
    if h_list.is_empty() {
        return Err(SolverError::InvalidConfig("no step sizes given".into()));
    }
    let coarsest = h_list.iter().copied().fold(f64::MIN, f64::max);
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let steps = integer_ratio(tau, h)
            .ok_or_else(|| SolverError::InvalidConfig(format!("step {h} does not divide horizon {tau}")))?;
        let stride = integer_ratio(coarsest, h)
            .ok_or_else(|| SolverError::InvalidConfig(format!("step {h} does not divide step {coarsest}")))?;
        let cfg = SolverConfig::new(alpha, h, steps, x0.to_vec())?;
        let traj = integrate(sys, &cfg, false)?;
        let mut max_error: f64 = 0.0;
        let mut max_error_full: f64 = 0.0;
        for (j, x) in traj.states().enumerate() {
            let exact = oracle(traj.time(j));
            let err = x.iter().zip(&exact).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            max_error_full = max_error_full.max(err);
            if j % stride == 0 {
                max_error = max_error.max(err);
            }
        }
        rows.push(ConvergenceRow { h, steps, max_error, max_error_full });
    }
    let fit = log_log_fit(rows.iter().map(|r| (r.h, r.max_error)));
    let fit_full = log_log_fit(rows.iter().map(|r| (r.h, r.max_error_full)));
    Ok(ConvergenceReport {
        slope: fit.map(|f| f.0),
        residual: fit.map(|f| f.1),
        slope_full: fit_full.map(|f| f.0),
        rows,
    })
}

fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let k = r.round();
    ((r - k).abs() <= 1e-9 * r.max(1.0) && k >= 1.0).then_some(k as usize)
}

// (slope, rms residual) of ln(err) against ln(h)
fn log_log_fit(points: impl Iterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.collect();
    if pts.len() < 2 || pts.iter().any(|&(_, e)| !(e > 0.0) || !e.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Some((slope, (rss / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Matrix;
    use crate::system::{constant_field, linear_decay, linear_field, quadratic_blowup, zero_field};

    fn order(a: f64) -> FracOrder {
        FracOrder::new(a).unwrap()
    }

    #[test]
    fn predictor_weight_values() {
        for a in [0.1, 0.65, 1.0] {
            assert_eq!(predictor_weight(0, 0, order(a)).unwrap(), 1.0);
            for n in [1, 5, 40] {
                assert_eq!(predictor_weight(n, n, order(a)).unwrap(), 1.0);
            }
        }
        let w = predictor_weight(0, 1, order(0.5)).unwrap();
        assert!((w - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((w - 0.414_213_6).abs() < 1e-7);
        for j in 0..10 {
            assert_eq!(predictor_weight(j, 9, order(1.0)).unwrap(), 1.0);
        }
        assert!(predictor_weight(3, 2, order(0.5)).is_err());
    }

    #[test]
    fn corrector_weight_values() {
        for a in [0.2, 0.65, 1.0] {
            assert!((corrector_weight(0, 0, order(a)).unwrap() - a).abs() < 1e-15);
            for n in [1, 2, 17] {
                let want = 2f64.powf(a + 1.0) - 2.0;
                assert!((corrector_weight(n, n, order(a)).unwrap() - want).abs() < 1e-14);
            }
        }
        // j = 1, n = 2, α = 0.65, evaluated in two operand orders
        let got = corrector_weight(1, 2, order(0.65)).unwrap();
        let forward = 3f64.powf(1.65) + 1.0 - 2.0 * 2f64.powf(1.65);
        let backward = -2.0 * 2f64.powf(1.65) + 1.0 + 3f64.powf(1.65);
        assert!((got - forward).abs() < 1e-14 && (got - backward).abs() < 1e-14);
        assert!((got - 0.850_358_112_662_047_6).abs() < 1e-14);
        assert!(corrector_weight(4, 3, order(0.5)).is_err());
    }

    #[test]
    fn cached_weights_match_direct_formulas() {
        let a = order(0.37);
        let w = AbmWeights::new(a, 50);
        for n in 0..50 {
            for j in 0..=n {
                assert_eq!(w.b(j, n), predictor_weight(j, n, a).unwrap());
                assert_eq!(w.a(j, n), corrector_weight(j, n, a).unwrap());
            }
        }
    }

    #[test]
    fn predictor_weights_telescope() {
        for a in [0.1, 0.5, 0.65, 0.99] {
            for n in [0usize, 1, 10, 500] {
                let s: f64 = (0..=n).map(|j| predictor_weight(j, n, order(a)).unwrap()).sum();
                assert!((s - ((n + 1) as f64).powf(a)).abs() < 1e-10, "a {a} n {n}");
            }
        }
    }

    #[test]
    fn config_validation() {
        let a = order(0.5);
        assert!(SolverConfig::new(a, 0.0, 10, vec![1.0]).is_err());
        assert!(SolverConfig::new(a, 0.1, 0, vec![1.0]).is_err());
        assert!(SolverConfig::new(a, 0.1, MAX_STEPS + 1, vec![1.0]).is_err());
        assert!(SolverConfig::new(a, 0.1, 10, vec![f64::NAN]).is_err());
        let cfg = SolverConfig::new(a, 0.01, 500, vec![1.0]).unwrap();
        assert!((cfg.horizon() - 5.0).abs() < 1e-12);
        let sys = zero_field(2);
        assert!(matches!(integrate(&sys, &cfg, false), Err(SolverError::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_field_stays_put() {
        let cfg = SolverConfig::new(order(0.65), 0.1, 20, vec![1.0, -2.0, 3.5]).unwrap();
        let traj = integrate(&zero_field(3), &cfg, true).unwrap();
        assert_eq!(traj.len(), 21);
        for x in traj.states() {
            assert_eq!(x, &[1.0, -2.0, 3.5]);
        }
        assert_eq!(traj.predictor_state(5).unwrap(), &[1.0, -2.0, 3.5]);
        assert!(traj.predictor_state(0).is_none());
        assert!(traj.predictor_state(21).is_none());
    }

    #[test]
    fn single_classical_step_by_hand() {
        let cfg = SolverConfig::new(order(1.0), 0.1, 1, vec![1.0]).unwrap();
        let sys = linear_decay(1.0);
        let mut stepper = AbmStepper::new(&sys, &cfg, false).unwrap();
        let (xp, x) = stepper.step().unwrap();
        assert!((xp[0] - 0.9).abs() < 1e-15);
        assert!((x[0] - 0.905).abs() < 1e-15);
        assert!(stepper.step().is_err());
    }

    #[test]
    fn constant_field_exact_at_alpha_one() {
        let cfg = SolverConfig::new(order(1.0), 0.01, 300, vec![0.5, -1.0]).unwrap();
        let traj = integrate(&constant_field(vec![2.0, -0.25]), &cfg, false).unwrap();
        for (j, x) in traj.states().enumerate() {
            let t = traj.time(j);
            assert!((x[0] - (0.5 + 2.0 * t)).abs() < 1e-12);
            assert!((x[1] - (-1.0 - 0.25 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_exact_for_fractional_order() {
        // x(t) = x0 + c t^α / Γ(α+1); both quadratures integrate constants exactly
        let a = 0.65;
        let cfg = SolverConfig::new(order(a), 0.05, 40, vec![1.0]).unwrap();
        let traj = integrate(&constant_field(vec![3.0]), &cfg, false).unwrap();
        let g = crate::numkit::gamma(a + 1.0).unwrap();
        for (j, x) in traj.states().enumerate() {
            let want = 1.0 + 3.0 * traj.time(j).powf(a) / g;
            assert!((x[0] - want).abs() < 1e-12, "j {j}");
        }
    }

    #[test]
    fn exponential_decay_at_alpha_one() {
        let cfg = SolverConfig::new(order(1.0), 0.01, 100, vec![1.0]).unwrap();
        let traj = integrate(&linear_decay(1.0), &cfg, false).unwrap();
        assert!((traj.final_state()[0] - (-1f64).exp()).abs() <= 1e-4);
    }

    #[test]
    fn blowup_reports_step() {
        let cfg = SolverConfig::new(order(1.0), 0.01, 1000, vec![10.0]).unwrap();
        match integrate(&quadratic_blowup(), &cfg, false) {
            Err(SolverError::NonFinite { step, time, .. }) => {
                assert!(step > 1 && step < 1000);
                assert!((time - step as f64 * 0.01).abs() < 1e-12);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn as_printed_anchor_differs() {
        let cfg = SolverConfig::new(order(0.8), 0.1, 5, vec![1.0]).unwrap();
        let sys = linear_decay(1.0);
        let with = integrate(&sys, &cfg, true).unwrap();
        let without = integrate(&sys, &cfg.clone().with_anchor(PredictorAnchor::AsPrinted), true).unwrap();
        assert_ne!(with.final_state(), without.final_state());
        // the as-printed predictor drops x₀ entirely at the first step
        let p = without.predictor_state(1).unwrap()[0];
        assert!(p < 0.0);
    }

    #[test]
    fn pairwise_sum_matches_plain_sum() {
        let dim = 2;
        let n = 3 * PAIRWISE_THRESHOLD;
        let fvals: Vec<f64> = (0..(n + 1) * dim).map(|k| ((k * 7919) % 1000) as f64 / 1000.0 - 0.5).collect();
        let w = |j: usize| 1.0 / (1.0 + j as f64);
        let pair = weighted_history_sum(&fvals, dim, n, w);
        let mut plain = vec![0.0; dim];
        accumulate(&fvals, dim, 0, n + 1, w, &mut plain);
        for i in 0..dim {
            assert!((pair[i] - plain[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let m = Matrix::from_rows([[-0.3, 1.0], [-1.0, -0.2]]);
        let cfg = SolverConfig::new(order(0.7), 0.02, 150, vec![1.0, 0.5]).unwrap();
        let sys = linear_field(m);
        let a = integrate(&sys, &cfg, true).unwrap();
        let b = integrate(&sys, &cfg, true).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_error_leaves_slope_undefined() {
        let rep =
            convergence_order(&zero_field(1), order(0.5), &[2.0], 1.0, &|_| vec![2.0], &[0.1, 0.05, 0.025]).unwrap();
        assert!(rep.rows.iter().all(|r| r.max_error == 0.0));
        assert!(rep.slope.is_none());
    }

    #[test]
    fn convergence_rejects_incommensurate_steps() {
        let r = convergence_order(&zero_field(1), order(0.5), &[0.0], 1.0, &|_| vec![0.0], &[0.1, 0.03]);
        assert!(r.is_err());
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts = [(0.1, 3.0 * 0.1f64.powf(1.7)), (0.05, 3.0 * 0.05f64.powf(1.7)), (0.025, 3.0 * 0.025f64.powf(1.7))];
        let (s, r) = log_log_fit(pts.into_iter()).unwrap();
        assert!((s - 1.7).abs() < 1e-12 && r < 1e-12);
        assert!(log_log_fit([(0.1, 1.0)].into_iter()).is_none());
    }
}
