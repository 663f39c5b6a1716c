use num_complex::Complex64;

use super::Matrix;

/// Singular values of a square matrix, descending (one-sided Jacobi).
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let n = m.dim();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| m[(i, j)]).collect()).collect();
    jacobi_singular_values(cols)
}

/// Rank of the complex matrix `m − λI`.
///
/// The complex n×n matrix B = Re + i·Im is embedded as the real 2n×2n
/// block matrix [[Re, −Im], [Im, Re]], whose singular values are those of
/// B, each repeated twice. A singular value counts toward the rank when it
/// exceeds `tol · max(1, σ_max)`.
pub fn complex_rank(m: &Matrix, lambda: Complex64, tol: f64) -> usize {
    let n = m.dim();
    let mut cols = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let re = m[(i, j)] - if i == j { lambda.re } else { 0.0 };
            let im = if i == j { -lambda.im } else { 0.0 };
            cols[j][i] = re;
            cols[j][n + i] = im;
            cols[n + j][i] = -im;
            cols[n + j][n + i] = re;
        }
    }
    let sv = jacobi_singular_values(cols);
    let cutoff = tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > cutoff).count() / 2
}

fn jacobi_singular_values(mut cols: Vec<Vec<f64>>) -> Vec<f64> {
    let n = cols.len();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (a, b) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = c * x - s * y;
                    *b = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
