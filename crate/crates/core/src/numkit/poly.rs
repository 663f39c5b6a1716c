use num_complex::Complex64;

use super::NumError;

const MAX_DEGREE: usize = 8;
const MAX_ITER: usize = 500;
const PAIR_TOL: f64 = 1e-9;

/// Real polynomial with coefficients in ascending degree order.
///
/// Trailing (highest-degree) zeros are trimmed on construction, so the last
/// stored coefficient is the nonzero leading one.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self, NumError> {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(NumError::ZeroPolynomial);
        }
        Ok(Self { coeffs })
    }

    /// Monic polynomial with the given real roots.
    pub fn from_real_roots(roots: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= r * ci;
            }
            c = next;
        }
        Self { coeffs: c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative at `z` (Horner).
    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Polynomial { coeffs: c }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// max |p(z)| / (1 + max |coeff|) over the given points.
    pub fn scaled_residual(&self, roots: &[Complex64]) -> f64 {
        let cmax = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        roots.iter().map(|&z| self.eval_complex(z).norm()).fold(0.0, f64::max) / (1.0 + cmax)
    }
}

/// All complex roots of `p`, with multiplicity.
///
/// Exact zero roots (vanishing low-order coefficients) are split off first;
/// the rest are found by Aberth-Ehrlich simultaneous iteration and then
/// symmetrised so that non-real roots come in exact conjugate pairs.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>, NumError> {
    let deg = p.degree();
    if deg == 0 {
        return Err(NumError::UnsupportedDegree(0));
    }
    if deg > MAX_DEGREE {
        return Err(NumError::UnsupportedDegree(deg));
    }
    let zeros = p.coeffs.iter().take_while(|&&c| c == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let reduced = Polynomial { coeffs: p.coeffs[zeros..].to_vec() };
    if reduced.degree() > 0 {
        let monic = reduced.scale(1.0 / reduced.leading());
        let found = aberth(&monic)?;
        roots.extend(pair_conjugates(found));
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn aberth(p: &Polynomial) -> Result<Vec<Complex64>, NumError> {
    let n = p.degree();
    if n == 1 {
        return Ok(vec![Complex64::new(-p.coeffs[0], 0.0)]);
    }
    // Cauchy bound on root moduli
    let radius = 1.0 + p.coeffs[..n].iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(0.5 * radius, theta)
        })
        .collect();

    for _ in 0..MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (pv, dpv) = p.eval_with_derivative(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dpv;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-15 {
            return Ok(polish(p, z));
        }
    }
    // multiple roots converge linearly; accept when the residual is tiny
    let z = polish(p, z);
    if p.scaled_residual(&z) <= 1e-12 {
        Ok(z)
    } else {
        Err(NumError::NoConvergence { method: "aberth", iterations: MAX_ITER })
    }
}

// A couple of Newton steps, kept only when they reduce |p|.
fn polish(p: &Polynomial, mut z: Vec<Complex64>) -> Vec<Complex64> {
    for zi in &mut z {
        for _ in 0..2 {
            let (pv, dpv) = p.eval_with_derivative(*zi);
            if dpv.norm() == 0.0 {
                break;
            }
            let cand = *zi - pv / dpv;
            if cand.is_finite() && p.eval_complex(cand).norm() < pv.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }
    z
}

fn pair_conjugates(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(roots.len());
    while let Some(r) = roots.pop() {
        if r.im.abs() <= PAIR_TOL * (1.0 + r.re.abs()) {
            out.push(Complex64::new(r.re, 0.0));
            continue;
        }
        let target = r.conj();
        let nearest = roots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).norm().total_cmp(&(b.1 - target).norm()))
            .map(|(k, _)| k);
        match nearest {
            Some(k) => {
                let q = roots.swap_remove(k);
                let re = 0.5 * (r.re + q.re);
                let im = 0.5 * (r.im.abs() + q.im.abs());
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            }
            None => out.push(r),
        }
    }
    out
}
