//! Local stability of equilibria of D^α x = f(x).
//!
//! An equilibrium is locally asymptotically stable iff every eigenvalue λ
//! of the Jacobian satisfies |arg λ| > απ/2, and locally stable iff in
//! addition the critical eigenvalues (|arg λ| = απ/2) all have geometric
//! multiplicity one. A zero eigenvalue has arg 0 and fails both tests.
//!
//! For cubic characteristic polynomials λ³ + a₁λ² + a₂λ + a₃ with positive
//! coefficients the sign of the discriminant decides without root finding:
//! D > 0 with a₁a₂ > a₃ gives stability for every α ∈ (0, 1], D < 0 gives
//! stability for α < 2/3.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use num_rational::Rational64;
use thiserror::Error;

use crate::numkit::{
    checked_arg, complex_rank, eigenvalues, Matrix, NumError, Polynomial, DEFAULT_RANK_TOL, DEFAULT_ZERO_TOL,
};
use crate::system::{EquilibriumPoint, FracOrder, GainVector, SystemDef, SystemError, DEFAULT_EQUILIBRIUM_TOL};

/// Default half-width of the critical band around |arg λ| = απ/2.
pub const DEFAULT_ARG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("eigenvalue list is empty")]
    NoEigenvalues,
    #[error("cubic coefficients must be positive, got a1 = {a1}, a2 = {a2}, a3 = {a3}")]
    NonPositiveCoefficients { a1: f64, a2: f64, a3: f64 },
    #[error("E1 parameters must satisfy m² + n² ≠ 0")]
    DegenerateE1,
    #[error("gains must be strictly positive, k{index} = {value}")]
    NonPositiveGain { index: usize, value: f64 },
    #[error("expected {expected} gains, got {got}")]
    GainCount { expected: usize, got: usize },
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    AsymptoticallyStable,
    Stable,
    Unstable,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::AsymptoticallyStable => "AsymptoticallyStable",
            Verdict::Stable => "Stable",
            Verdict::Unstable => "Unstable",
            Verdict::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatignonConfig {
    /// Eigenvalues with |λ| ≤ zero_tol count as zero.
    pub zero_tol: f64,
    /// Margins within ±arg_tol of zero are critical.
    pub arg_tol: f64,
    /// Relative singular-value cutoff for geometric multiplicities.
    pub rank_tol: f64,
}

impl Default for MatignonConfig {
    fn default() -> Self {
        Self { zero_tol: DEFAULT_ZERO_TOL, arg_tol: DEFAULT_ARG_TOL, rank_tol: DEFAULT_RANK_TOL }
    }
}

/// Outcome of the argument test at one equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    /// `None` when classified from a bare eigenvalue list.
    pub point: Option<EquilibriumPoint>,
    pub alpha: FracOrder,
    pub eigenvalues: Vec<Complex64>,
    /// |arg λ| − απ/2 in radians; `None` for zero eigenvalues.
    pub margins: Vec<Option<f64>>,
    pub verdict: Verdict,
    pub zero_eigs: usize,
}

impl EquilibriumReport {
    /// Smallest defined margin.
    pub fn min_margin(&self) -> Option<f64> {
        self.margins.iter().flatten().copied().reduce(f64::min)
    }

    /// Human-readable multi-line summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.point {
            let _ = writeln!(s, "point: ({})", join(p.as_slice().iter().map(|v| format!("{v}"))));
        }
        let _ = writeln!(s, "alpha: {}", self.alpha);
        let _ = writeln!(s, "critical angle: {:.12} rad", self.alpha.value() * PI / 2.0);
        let _ = writeln!(s, "eigenvalues:");
        for (lam, margin) in self.eigenvalues.iter().zip(&self.margins) {
            let m = match margin {
                Some(m) => format!("{m:+.12}"),
                None => "undefined (zero eigenvalue)".into(),
            };
            let _ = writeln!(s, "  {}  margin {m}", fmt_complex(*lam));
        }
        let _ = writeln!(s, "zero eigenvalues: {}", self.zero_eigs);
        let _ = writeln!(s, "verdict: {}", self.verdict);
        s
    }

    /// `key=value` lines; eigenvalue i is `eig.i.re` / `eig.i.im`.
    pub fn to_kv(&self) -> Vec<(String, String)> {
        let mut kv = Vec::new();
        if let Some(p) = &self.point {
            kv.push(("point".into(), join(p.as_slice().iter().map(|v| format!("{v:e}")))));
        }
        kv.push(("alpha".into(), format!("{}", self.alpha)));
        kv.push(("eig.count".into(), self.eigenvalues.len().to_string()));
        for (i, (lam, margin)) in self.eigenvalues.iter().zip(&self.margins).enumerate() {
            kv.push((format!("eig.{}.re", i + 1), format!("{:e}", lam.re)));
            kv.push((format!("eig.{}.im", i + 1), format!("{:e}", lam.im)));
            let m = margin.map_or_else(|| "undefined".to_string(), |m| format!("{m:e}"));
            kv.push((format!("eig.{}.margin", i + 1), m));
        }
        kv.push(("zero_eigs".into(), self.zero_eigs.to_string()));
        kv.push(("verdict".into(), self.verdict.to_string()));
        kv
    }
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:+.12}", z.re)
    } else {
        format!("{:+.12} {} {:.12}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

/// Argument test on an explicit eigenvalue list.
///
/// `jac` is needed only to resolve critical eigenvalues; without it such
/// cases come back [`Verdict::Indeterminate`].
pub fn matignon_classify(
    eigs: &[Complex64],
    alpha: FracOrder,
    jac: Option<&Matrix>,
    cfg: &MatignonConfig,
) -> Result<EquilibriumReport, StabilityError> {
    if eigs.is_empty() {
        return Err(StabilityError::NoEigenvalues);
    }
    let half_angle = alpha.value() * PI / 2.0;
    let margins: Vec<Option<f64>> =
        eigs.iter().map(|&l| checked_arg(l, cfg.zero_tol).map(|a| a.abs() - half_angle)).collect();
    let zero_eigs = margins.iter().filter(|m| m.is_none()).count();

    let verdict = if zero_eigs > 0 || margins.iter().flatten().any(|&m| m < -cfg.arg_tol) {
        Verdict::Unstable
    } else if margins.iter().flatten().all(|&m| m > cfg.arg_tol) {
        Verdict::AsymptoticallyStable
    } else {
        match jac {
            None => Verdict::Indeterminate,
            Some(j) => {
                let n = j.dim();
                let simple = eigs
                    .iter()
                    .zip(&margins)
                    .filter(|(_, m)| m.is_some_and(|m| m.abs() <= cfg.arg_tol))
                    .all(|(&l, _)| n - complex_rank(j, l, cfg.rank_tol) == 1);
                if simple {
                    Verdict::Stable
                } else {
                    Verdict::Unstable
                }
            }
        }
    };
    Ok(EquilibriumReport { point: None, alpha, eigenvalues: eigs.to_vec(), margins, verdict, zero_eigs })
}

/// Jacobian eigenvalues and argument test at an equilibrium of `sys`.
///
/// A numerically singular Jacobian counts as having a zero eigenvalue
/// even when the computed eigenvalues scatter slightly off the origin.
pub fn classify_equilibrium(
    sys: &SystemDef,
    x_e: &EquilibriumPoint,
    alpha: FracOrder,
    cfg: &MatignonConfig,
) -> Result<EquilibriumReport, StabilityError> {
    let residual = sys.residual(x_e.as_slice())?;
    if residual > DEFAULT_EQUILIBRIUM_TOL {
        return Err(SystemError::NotEquilibrium { residual }.into());
    }
    let j = sys.jacobian(x_e.as_slice());
    let eigs = eigenvalues(&j)?;
    let mut report = matignon_classify(&eigs, alpha, Some(&j), cfg)?;
    let nullity = j.dim() - complex_rank(&j, Complex64::new(0.0, 0.0), cfg.rank_tol);
    if nullity > report.zero_eigs {
        report.zero_eigs = nullity;
        report.verdict = Verdict::Unstable;
    }
    report.point = Some(x_e.clone());
    Ok(report)
}

/// Supremum of the orders α ∈ (0, 1] at which the argument test passes:
/// `Some(1.0)` when every α works, `None` when none does.
pub fn alpha_stability_bound(eigs: &[Complex64], zero_tol: f64) -> Option<f64> {
    let mut bound: f64 = 1.0;
    for &l in eigs {
        let arg = checked_arg(l, zero_tol)?.abs();
        let a = 2.0 * arg / PI;
        if a <= 0.0 {
            return None;
        }
        bound = bound.min(a);
    }
    Some(bound)
}

/// λ³ + a₁λ² + a₂λ + a₃ with its discriminant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub discriminant: f64,
}

fn cubic_discriminant(a1: f64, a2: f64, a3: f64) -> f64 {
    18.0 * a1 * a2 * a3 + a1 * a1 * a2 * a2 - 4.0 * a3 * a1 * a1 * a1 - 4.0 * a2 * a2 * a2 - 27.0 * a3 * a3
}

impl CubicCoeffs {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3, discriminant: cubic_discriminant(a1, a2, a3) }
    }

    /// Whether the stored discriminant equals a fresh evaluation.
    pub fn is_consistent(&self) -> bool {
        self.discriminant == cubic_discriminant(self.a1, self.a2, self.a3)
    }

    pub fn polynomial(&self) -> Polynomial {
        Polynomial::new(vec![self.a3, self.a2, self.a1, 1.0]).expect("monic")
    }
}

/// Coefficients of the E₁ cubic factor for gains k₃, k₄, k₅ at (m, n, 0, 0, 0).
pub fn cubic_from_gains(k3: f64, k4: f64, k5: f64, m: f64, n: f64) -> Result<CubicCoeffs, StabilityError> {
    cubic_from_gains_squared(k3, k4, k5, m * m, n * n)
}

/// As [`cubic_from_gains`] but from m² and n² directly, so that exactly
/// representable squares stay exact.
pub fn cubic_from_gains_squared(
    k3: f64,
    k4: f64,
    k5: f64,
    m_sq: f64,
    n_sq: f64,
) -> Result<CubicCoeffs, StabilityError> {
    if m_sq + n_sq == 0.0 {
        return Err(StabilityError::DegenerateE1);
    }
    let a1 = k3 + k4 + k5;
    let a2 = k3 * k4 + k3 * k5 + k4 * k5 + m_sq + n_sq;
    let a3 = k3 * k4 * k5 + k3 * n_sq + k4 * m_sq;
    Ok(CubicCoeffs::new(a1, a2, a3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhClass {
    /// D > 0 and a₁a₂ > a₃: stable for every α ∈ (0, 1].
    StableAllAlpha01,
    /// D < 0: stable for α ∈ (0, 2/3).
    StableAlphaBelowTwoThirds,
    NotDecided,
}

impl RhClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RhClass::StableAllAlpha01 => "StableAllAlpha01",
            RhClass::StableAlphaBelowTwoThirds => "StableAlphaBelowTwoThirds",
            RhClass::NotDecided => "NotDecided",
        }
    }

    /// Whether this class guarantees asymptotic stability at `alpha`.
    pub fn guarantees(self, alpha: FracOrder) -> bool {
        match self {
            RhClass::StableAllAlpha01 => true,
            RhClass::StableAlphaBelowTwoThirds => alpha.value() < 2.0 / 3.0,
            RhClass::NotDecided => false,
        }
    }

    pub fn alpha_range(self) -> &'static str {
        match self {
            RhClass::StableAllAlpha01 => "(0, 1)",
            RhClass::StableAlphaBelowTwoThirds => "(0, 2/3)",
            RhClass::NotDecided => "none",
        }
    }
}

impl fmt::Display for RhClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhOutcome {
    pub class: RhClass,
    /// Whether the class covers the requested α.
    pub holds_at_alpha: bool,
}

/// Discriminant-based fractional Routh-Hurwitz test for a cubic with
/// positive coefficients.
pub fn routh_hurwitz_cubic(c: &CubicCoeffs, alpha: FracOrder) -> Result<RhOutcome, StabilityError> {
    if !(c.a1 > 0.0 && c.a2 > 0.0 && c.a3 > 0.0) {
        return Err(StabilityError::NonPositiveCoefficients { a1: c.a1, a2: c.a2, a3: c.a3 });
    }
    let class = if c.discriminant > 0.0 && c.a1 * c.a2 > c.a3 {
        RhClass::StableAllAlpha01
    } else if c.discriminant < 0.0 {
        RhClass::StableAlphaBelowTwoThirds
    } else {
        RhClass::NotDecided
    };
    Ok(RhOutcome { class, holds_at_alpha: class.guarantees(alpha) })
}

/// Diagnostics for gains k₁..k₅ steering the controlled Maxwell-Bloch
/// system to (0, 0, 0, 0, m).
#[derive(Debug, Clone, PartialEq)]
pub struct E2GainReport {
    pub delta1: f64,
    pub delta2: f64,
    pub u: f64,
    pub v: f64,
    /// The five sufficient conditions in the order they are usually listed:
    /// C1: |k₁−k₃| = |k₂−k₄| and m = u ≠ 0; C2: max(u, v) < m < min(k₁k₃, k₂k₄);
    /// C3: u < m < min(v, k₁k₃); C4: v < m < min(u, k₂k₄); C5: m < min(u, v).
    pub listed: [bool; 5],
    /// The same inequalities in the order their derivation visits the sign
    /// cases of (Δ₁, Δ₂): (0,0), (+,+), (−,+), (+,−), (−,−).
    pub derived: [bool; 5],
    /// −k₅, (−(k₁+k₃) ± √Δ₁)/2, (−(k₂+k₄) ± √Δ₂)/2.
    pub eigenvalues: Vec<Complex64>,
}

impl E2GainReport {
    pub fn any_listed(&self) -> bool {
        self.listed.iter().any(|&b| b)
    }

    /// Whether the two numberings attach a different label to what holds.
    pub fn labels_disagree(&self) -> bool {
        self.listed != self.derived
    }

    /// 1-based labels of the listed conditions that hold.
    pub fn listed_labels(&self) -> Vec<usize> {
        labels(&self.listed)
    }

    pub fn derived_labels(&self) -> Vec<usize> {
        labels(&self.derived)
    }

    /// Authoritative verdict: the argument test on the closed-form spectrum.
    pub fn verdict(&self, alpha: FracOrder, jac: Option<&Matrix>) -> Result<EquilibriumReport, StabilityError> {
        matignon_classify(&self.eigenvalues, alpha, jac, &MatignonConfig::default())
    }
}

fn labels(flags: &[bool; 5]) -> Vec<usize> {
    flags.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i + 1).collect()
}

fn quadratic_roots(sum: f64, disc: f64) -> [Complex64; 2] {
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new((-sum - r) / 2.0, 0.0), Complex64::new((-sum + r) / 2.0, 0.0)]
    } else {
        let r = (-disc).sqrt() / 2.0;
        [Complex64::new(-sum / 2.0, -r), Complex64::new(-sum / 2.0, r)]
    }
}

/// Evaluates the E₂ gain conditions for `k` (five strictly positive gains)
/// at parameter `m`.
pub fn e2_gain_condition(k: &GainVector, m: f64) -> Result<E2GainReport, StabilityError> {
    let k = k.as_slice();
    if k.len() != 5 {
        return Err(StabilityError::GainCount { expected: 5, got: k.len() });
    }
    if let Some(i) = k.iter().position(|&g| !(g > 0.0)) {
        return Err(StabilityError::NonPositiveGain { index: i + 1, value: k[i] });
    }
    let (k1, k2, k3, k4, k5) = (k[0], k[1], k[2], k[3], k[4]);
    let d13 = (k1 - k3) * (k1 - k3);
    let d24 = (k2 - k4) * (k2 - k4);
    let delta1 = d13 + 4.0 * m;
    let delta2 = d24 + 4.0 * m;
    let u = -d13 / 4.0;
    let v = -d24 / 4.0;

    let c1 = (k1 - k3).abs() == (k2 - k4).abs() && m == u && m != 0.0;
    let c2 = u.max(v) < m && m < (k1 * k3).min(k2 * k4);
    let c3 = u < m && m < v.min(k1 * k3);
    let c4 = v < m && m < u.min(k2 * k4);
    let c5 = m < u.min(v);
    let listed = [c1, c2, c3, c4, c5];
    let derived = [c1, c2, c4, c3, c5];

    let mut eigenvalues = vec![Complex64::new(-k5, 0.0)];
    eigenvalues.extend(quadratic_roots(k1 + k3, delta1));
    eigenvalues.extend(quadratic_roots(k2 + k4, delta2));
    Ok(E2GainReport { delta1, delta2, u, v, listed, derived, eigenvalues })
}

/// Δ₁ = (k₁−k₃)² + 4m and Δ₂ = (k₂−k₄)² + 4m in exact rational arithmetic.
pub fn e2_deltas_exact(
    k1: Rational64,
    k2: Rational64,
    k3: Rational64,
    k4: Rational64,
    m: Rational64,
) -> (Rational64, Rational64) {
    let four = Rational64::from_integer(4);
    let d1 = (k1 - k3) * (k1 - k3) + four * m;
    let d2 = (k2 - k4) * (k2 - k4) + four * m;
    (d1, d2)
}
