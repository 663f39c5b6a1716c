//! The real five-dimensional Maxwell-Bloch system
//!
//! ```text
//! D^α x¹ = x³        D^α x³ = x¹x⁵       D^α x⁵ = −(x¹x³ + x²x⁴)
//! D^α x² = x⁴        D^α x⁴ = x²x⁵
//! ```
//!
//! x¹, x² are the electric field, x³, x⁴ the polarization and x⁵ the
//! population inversion. With u = x¹ + i x², v = x³ + i x⁴, w = x⁵ this is
//! the complex system D^α u = v, D^α v = u w, D^α w = −Re(ū v), which is
//! invariant under the common phase rotation (u, v) ↦ (e^{iθ}u, e^{iθ}v).
//!
//! In matrix form f(x) = A x + x¹ A₁ x + x² A₂ x with constant A, A₁, A₂.
//!
//! The equilibria are the union of
//! E₁ = {(m, n, 0, 0, 0) : m² + n² ≠ 0} and E₂ = {(0, 0, 0, 0, m)}.
//! All of them are unstable for the uncontrolled system; linear feedback
//! D^α x = f(x) − k ⊙ (x − x_e) can stabilize them.

use std::fmt;

use fracdyn_core::numkit::Matrix;
use fracdyn_core::system::{EquilibriumPoint, GainVector, SystemDef, SystemError};
use thiserror::Error;

pub const DIM: usize = 5;

/// Registry name of the uncontrolled model.
pub const SYSTEM_NAME: &str = "maxwell-bloch-5d";
/// Registry name of the feedback-controlled model.
pub const CONTROLLED_NAME: &str = "maxwell-bloch-5d-controlled";

/// Tolerance used when deciding whether a point lies on E₁ or E₂.
pub const FAMILY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MbError {
    #[error("state component x{index} is not finite")]
    NonFinite { index: usize },
    #[error("E1 needs m² + n² ≠ 0")]
    DegenerateE1,
    #[error("point {0:?} is not on either equilibrium family")]
    NotInFamily(Vec<f64>),
    #[error("Lipschitz domain half-width must be positive, got {0}")]
    InvalidDelta(f64),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// A finite point of R⁵.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbState([f64; DIM]);

impl MbState {
    pub fn new(x: [f64; DIM]) -> Result<Self, MbError> {
        match x.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(MbError::NonFinite { index: i + 1 }),
            None => Ok(Self(x)),
        }
    }

    pub fn from_slice(x: &[f64]) -> Result<Self, MbError> {
        let arr: [f64; DIM] =
            x.try_into().map_err(|_| SystemError::DimensionMismatch { expected: DIM, got: x.len() })?;
        Self::new(arr)
    }

    pub fn as_array(&self) -> &[f64; DIM] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// The constant matrices of the matrix form.
#[derive(Debug, Clone, PartialEq)]
pub struct MbMatrices {
    pub a: Matrix,
    pub a1: Matrix,
    pub a2: Matrix,
}

impl MbMatrices {
    pub fn new() -> Self {
        let mut a = Matrix::zeros(DIM);
        a[(0, 2)] = 1.0;
        a[(1, 3)] = 1.0;
        let mut a1 = Matrix::zeros(DIM);
        a1[(2, 4)] = 1.0;
        a1[(4, 2)] = -1.0;
        let mut a2 = Matrix::zeros(DIM);
        a2[(3, 4)] = 1.0;
        a2[(4, 3)] = -1.0;
        Self { a, a1, a2 }
    }
}

impl Default for MbMatrices {
    fn default() -> Self {
        Self::new()
    }
}

fn field_into(x: &[f64], out: &mut [f64]) {
    out[0] = x[2];
    out[1] = x[3];
    out[2] = x[0] * x[4];
    out[3] = x[1] * x[4];
    out[4] = -(x[0] * x[2] + x[1] * x[3]);
}

fn jacobian_of(x: &[f64]) -> Matrix {
    Matrix::from_rows([
        [0.0, 0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
        [x[4], 0.0, 0.0, 0.0, x[0]],
        [0.0, x[4], 0.0, 0.0, x[1]],
        [-x[2], -x[3], -x[0], -x[1], 0.0],
    ])
}

/// f(x) = (x³, x⁴, x¹x⁵, x²x⁵, −(x¹x³ + x²x⁴)).
pub fn mb_field(x: &MbState) -> [f64; DIM] {
    let mut out = [0.0; DIM];
    field_into(&x.0, &mut out);
    out
}

/// A x + x¹ A₁ x + x² A₂ x.
pub fn mb_field_matrix_form(x: &MbState) -> [f64; DIM] {
    let m = MbMatrices::new();
    let v = &x.0;
    let ax = m.a.mul_vec(v);
    let a1x = m.a1.mul_vec(v);
    let a2x = m.a2.mul_vec(v);
    std::array::from_fn(|i| ax[i] + v[0] * a1x[i] + v[1] * a2x[i])
}

/// Jacobian of [`mb_field`].
pub fn mb_jacobian(x: &MbState) -> Matrix {
    jacobian_of(&x.0)
}

/// f(x) − k ⊙ (x − x_e), evaluated through [`controlled_system`].
pub fn mb_controlled_field(x: &MbState, k: &GainVector, x_e: &EquilibriumPoint) -> Result<[f64; DIM], MbError> {
    let family = family_of(x_e.as_slice()).ok_or_else(|| MbError::NotInFamily(x_e.as_slice().to_vec()))?;
    let sys = controlled_system(k, family)?;
    let f = sys.eval(&x.0);
    Ok(std::array::from_fn(|i| f[i]))
}

/// J(x) − diag(k).
pub fn mb_controlled_jacobian(x: &MbState, k: &GainVector) -> Result<Matrix, MbError> {
    if k.len() != DIM {
        return Err(SystemError::DimensionMismatch { expected: DIM, got: k.len() }.into());
    }
    let mut j = jacobian_of(&x.0);
    for (i, g) in k.as_slice().iter().enumerate() {
        j[(i, i)] -= g;
    }
    Ok(j)
}

/// One of the two equilibrium families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EquilibriumFamily {
    /// (m, n, 0, 0, 0) with m² + n² ≠ 0.
    E1 { m: f64, n: f64 },
    /// (0, 0, 0, 0, m).
    E2 { m: f64 },
}

impl fmt::Display for EquilibriumFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquilibriumFamily::E1 { m, n } => write!(f, "E1(m={m}, n={n})"),
            EquilibriumFamily::E2 { m } => write!(f, "E2(m={m})"),
        }
    }
}

/// The member of `family` with the given parameters.
pub fn mb_equilibria(family: EquilibriumFamily) -> Result<EquilibriumPoint, MbError> {
    let x = match family {
        EquilibriumFamily::E1 { m, n } => {
            if m * m + n * n == 0.0 {
                return Err(MbError::DegenerateE1);
            }
            vec![m, n, 0.0, 0.0, 0.0]
        }
        EquilibriumFamily::E2 { m } => vec![0.0, 0.0, 0.0, 0.0, m],
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MbError::NonFinite { index: 1 });
    }
    Ok(EquilibriumPoint::from_exact(x))
}

/// The family containing `x` (within [`FAMILY_TOL`]), preferring E₂ at the
/// origin.
pub fn family_of(x: &[f64]) -> Option<EquilibriumFamily> {
    if x.len() != DIM {
        return None;
    }
    let small = |v: f64| v.abs() <= FAMILY_TOL;
    if small(x[0]) && small(x[1]) && small(x[2]) && small(x[3]) {
        return Some(EquilibriumFamily::E2 { m: x[4] });
    }
    if small(x[2]) && small(x[3]) && small(x[4]) {
        return Some(EquilibriumFamily::E1 { m: x[0], n: x[1] });
    }
    None
}

/// The uncontrolled model as a [`SystemDef`].
pub fn system() -> SystemDef {
    SystemDef::new(SYSTEM_NAME, DIM, field_into, jacobian_of)
}

/// The model with feedback gains `k` towards the given family member.
pub fn controlled_system(k: &GainVector, family: EquilibriumFamily) -> Result<SystemDef, MbError> {
    let x_e = mb_equilibria(family)?;
    Ok(system().controlled(k, &x_e)?)
}

/// Lipschitz constant L = √2 (1 + 4|x₀| + 2δ) of f on the box
/// D = {x : |xⁱ − x₀ⁱ| ≤ δ, i = 1..5}, with |x₀| the Euclidean norm.
pub fn mb_lipschitz_bound(x0: &MbState, delta: f64) -> Result<f64, MbError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(MbError::InvalidDelta(delta));
    }
    Ok(std::f64::consts::SQRT_2 * (1.0 + 4.0 * x0.norm() + 2.0 * delta))
}

/// Whether `x` lies in the box of half-width `delta` around `x0`.
pub fn in_lipschitz_domain(x0: &MbState, delta: f64, x: &MbState) -> bool {
    x0.0.iter().zip(&x.0).all(|(c, v)| (v - c).abs() <= delta)
}

/// (x³)² + (x⁴)² + (x⁵)², conserved by the classical (α = 1) flow.
pub fn invariant_c1(x: &[f64]) -> f64 {
    x[2] * x[2] + x[3] * x[3] + x[4] * x[4]
}

/// x²x³ − x¹x⁴, conserved by the classical (α = 1) flow.
pub fn invariant_c2(x: &[f64]) -> f64 {
    x[1] * x[2] - x[0] * x[3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracdyn_core::numkit::{characteristic_polynomial, singular_values};

    fn st(x: [f64; 5]) -> MbState {
        MbState::new(x).unwrap()
    }

    #[test]
    fn field_examples() {
        assert_eq!(mb_field(&st([0.3, -2.0, 0.0, 0.0, 0.0])), [0.0; 5]);
        assert_eq!(mb_field(&st([0.0, 0.0, 0.0, 0.0, 1.7])), [0.0; 5]);
        assert_eq!(mb_field(&st([1.0; 5])), [1.0, 1.0, 1.0, 1.0, -2.0]);
    }

    #[test]
    fn matrix_form_examples() {
        assert_eq!(mb_field_matrix_form(&st([0.0; 5])), [0.0; 5]);
        let x = st([1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(mb_field_matrix_form(&x), [0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(mb_field(&x), mb_field_matrix_form(&x));
    }

    #[test]
    fn matrices_have_exact_entries_and_norm_sqrt2() {
        let m = MbMatrices::new();
        let nonzeros = |a: &Matrix| a.as_slice().iter().filter(|v| **v != 0.0).count();
        assert_eq!(nonzeros(&m.a), 2);
        assert_eq!(nonzeros(&m.a1), 2);
        assert_eq!(nonzeros(&m.a2), 2);
        assert_eq!((m.a1[(2, 4)], m.a1[(4, 2)]), (1.0, -1.0));
        assert_eq!((m.a2[(3, 4)], m.a2[(4, 3)]), (1.0, -1.0));
        // √2 is the Frobenius norm; the spectral norm is 1, so √2 bounds both
        for a in [&m.a, &m.a1, &m.a2] {
            let frobenius = a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_eq!(frobenius, std::f64::consts::SQRT_2);
            assert!((singular_values(a)[0] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn state_rejects_non_finite() {
        assert_eq!(MbState::new([0.0, f64::NAN, 0.0, 0.0, 0.0]), Err(MbError::NonFinite { index: 2 }));
        assert!(MbState::from_slice(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn equilibria_examples() {
        let e = mb_equilibria(EquilibriumFamily::E1 { m: 3f64.sqrt() / 4.0, n: 0.25 }).unwrap();
        assert_eq!(e.as_slice(), &[3f64.sqrt() / 4.0, 0.25, 0.0, 0.0, 0.0]);
        let e = mb_equilibria(EquilibriumFamily::E2 { m: -0.125 }).unwrap();
        assert_eq!(e.as_slice(), &[0.0, 0.0, 0.0, 0.0, -0.125]);
        assert_eq!(mb_equilibria(EquilibriumFamily::E2 { m: 0.0 }).unwrap().as_slice(), &[0.0; 5]);
        assert_eq!(mb_equilibria(EquilibriumFamily::E1 { m: 0.0, n: 0.0 }), Err(MbError::DegenerateE1));
        let sys = system();
        for fam in [EquilibriumFamily::E1 { m: -1.3, n: 0.2 }, EquilibriumFamily::E2 { m: 4.0 }] {
            let p = mb_equilibria(fam).unwrap();
            assert_eq!(sys.residual(p.as_slice()).unwrap(), 0.0);
        }
    }

    #[test]
    fn charpoly_at_e1_and_e2() {
        // det(λI − J) = λ³(λ² + m² + n²) at E₁ and λ(λ² − m)² at E₂
        let (m, n) = (0.7, -1.1);
        let j = mb_jacobian(&st([m, n, 0.0, 0.0, 0.0]));
        let c = characteristic_polynomial(&j);
        let want = [0.0, 0.0, 0.0, m * m + n * n, 0.0, 1.0];
        for (a, b) in c.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let m = -0.4;
        let c = characteristic_polynomial(&mb_jacobian(&st([0.0, 0.0, 0.0, 0.0, m])));
        let want = [0.0, m * m, 0.0, -2.0 * m, 0.0, 1.0];
        for (a, b) in c.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn controlled_jacobian_with_zero_gain_is_plain_jacobian() {
        let x = st([0.2, -0.3, 1.1, 0.4, -0.9]);
        let j = mb_controlled_jacobian(&x, &GainVector::zeros(5)).unwrap();
        assert_eq!(j, mb_jacobian(&x));
    }

    #[test]
    fn controlled_field_vanishes_at_target() {
        let k = GainVector::new(vec![1.2, 1.2, 0.5, 0.5, 0.0]).unwrap();
        let x_e = mb_equilibria(EquilibriumFamily::E1 { m: 3f64.sqrt() / 4.0, n: 0.25 }).unwrap();
        let at = MbState::from_slice(x_e.as_slice()).unwrap();
        assert_eq!(mb_controlled_field(&at, &k, &x_e).unwrap(), [0.0; 5]);
        let off = EquilibriumPoint::from_exact(vec![1.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(mb_controlled_field(&at, &k, &off), Err(MbError::NotInFamily(_))));
    }

    #[test]
    fn controlled_field_by_hand_near_target() {
        let eps = 0.01;
        let (m, n) = (3f64.sqrt() / 4.0, 0.25);
        let k = [1.2, 1.2, 0.5, 0.5, 0.0];
        let x_e = mb_equilibria(EquilibriumFamily::E1 { m, n }).unwrap();
        let x = [m + eps, n + eps, eps, eps, eps];
        let got = mb_controlled_field(&st(x), &GainVector::new(k.to_vec()).unwrap(), &x_e).unwrap();
        let want = [
            eps - 1.2 * eps,
            eps - 1.2 * eps,
            (m + eps) * eps - 0.5 * eps,
            (n + eps) * eps - 0.5 * eps,
            -((m + eps) * eps + (n + eps) * eps),
        ];
        for i in 0..5 {
            assert!((got[i] - want[i]).abs() < 1e-16, "component {i}");
        }
    }

    #[test]
    fn controlled_system_names() {
        assert_eq!(system().name(), SYSTEM_NAME);
        let k = GainVector::uniform(5, 1.0).unwrap();
        let c = controlled_system(&k, EquilibriumFamily::E2 { m: 0.0 }).unwrap();
        assert_eq!(c.name(), CONTROLLED_NAME);
    }

    #[test]
    fn lipschitz_examples() {
        let origin = st([0.0; 5]);
        let l = mb_lipschitz_bound(&origin, 1e-12).unwrap();
        assert!((l - std::f64::consts::SQRT_2).abs() < 1e-10);
        let unit = st([0.6, 0.0, 0.8, 0.0, 0.0]);
        let l = mb_lipschitz_bound(&unit, 0.5).unwrap();
        assert!((l - 6.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!((l - 8.485).abs() < 1e-3);
        assert!(mb_lipschitz_bound(&unit, 0.0).is_err());
        assert!(in_lipschitz_domain(&unit, 0.5, &st([1.0, 0.4, 0.4, -0.4, 0.1])));
        assert!(!in_lipschitz_domain(&unit, 0.5, &st([1.2, 0.0, 0.8, 0.0, 0.0])));
    }

    #[test]
    fn family_classification() {
        assert_eq!(family_of(&[0.0; 5]), Some(EquilibriumFamily::E2 { m: 0.0 }));
        assert_eq!(family_of(&[1.0, 0.0, 0.0, 0.0, 0.0]), Some(EquilibriumFamily::E1 { m: 1.0, n: 0.0 }));
        assert_eq!(family_of(&[1.0, 0.0, 0.0, 0.0, 1.0]), None);
        assert_eq!(family_of(&[1.0, 0.0]), None);
    }
}
