//! Self-contained numerical kernels.
//!
//! Everything here is a pure function of its inputs: the gamma function,
//! polynomial roots by simultaneous iteration, eigenvalues of small dense
//! matrices by Hessenberg QR, singular values and ranks, and a
//! Mittag-Leffler evaluator used as an analytic oracle for the solver.

mod eigen;
mod gamma;
mod matrix;
mod mittag_leffler;
mod poly;
mod svd;

pub use eigen::{characteristic_polynomial, eigenvalues};
pub use gamma::gamma;
pub use matrix::Matrix;
pub use mittag_leffler::{mittag_leffler, mittag_leffler_integral, mittag_leffler_series};
pub use poly::{poly_roots, Polynomial};
pub use svd::{complex_rank, singular_values};

pub use num_complex::Complex64;

use thiserror::Error;

/// Modulus at or below which an eigenvalue or root is treated as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Singular-value threshold used by rank queries.
pub const DEFAULT_RANK_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("{func}: argument {x} outside the supported domain")]
    Domain { func: &'static str, x: f64 },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("polynomial degree {0} is outside the supported range 1..=8")]
    UnsupportedDegree(usize),
    #[error("matrix dimension {0} is outside the supported range 1..=8")]
    UnsupportedDimension(usize),
    #[error("expected {expected} matrix entries, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("{method} did not converge within {iterations} iterations")]
    NoConvergence { method: &'static str, iterations: usize },
}

/// Argument of `z` in (−π, π], or `None` when `|z| <= zero_tol`.
pub fn checked_arg(z: Complex64, zero_tol: f64) -> Option<f64> {
    if z.norm() <= zero_tol {
        None
    } else {
        Some(z.im.atan2(z.re))
    }
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Match two multisets of complex numbers greedily and return the largest
/// pairwise distance, or `None` if the lengths differ.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for za in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, zb)| (i, (za - zb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))?;
        used[idx] = true;
        worst = worst.max(d);
    }
    Some(worst)
}
