//! Small dense matrix helpers for basis manipulation. Matrices are row-major
//! `Vec<Vec<f64>>`; sizes here never exceed a handful of rows.

use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<f64>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    (0..cols).map(|j| (0..rows).map(|i| a[i][j]).collect()).collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

pub fn matvec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum()).collect()
}

/// LU factorisation with partial pivoting. Returns the determinant and the
/// inverse, or `SingularBasis` when a pivot collapses.
pub fn det_and_inverse(a: &Matrix) -> Result<(f64, Matrix)> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lu = a.clone();
    let mut inv = identity(n);
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[i][col].abs().total_cmp(&lu[j][col].abs()))
            .unwrap_or(col);
        if lu[pivot][col].abs() <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularBasis(0.0));
        }
        if pivot != col {
            lu.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = lu[col][col];
        det *= p;
        for j in 0..n {
            lu[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let factor = lu[i][col];
                if factor != 0.0 {
                    for j in 0..n {
                        lu[i][j] -= factor * lu[col][j];
                        inv[i][j] -= factor * inv[col][j];
                    }
                }
            }
        }
    }
    Ok((det, inv))
}

/// Numerical rank via Gaussian elimination with a relative tolerance.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let mut m = a.clone();
    let rows = m.len();
    let cols = m[0].len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pivot = (r..rows)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[pivot][c].abs() <= rel_tol * scale {
            continue;
        }
        m.swap(pivot, r);
        let (top, bottom) = m.split_at_mut(r + 1);
        let prow = &top[r];
        for row in bottom.iter_mut().take(rows - r - 1) {
            let f = row[c] / prow[c];
            for (x, p) in row[c..cols].iter_mut().zip(&prow[c..cols]) {
                *x -= f * p;
            }
        }
        r += 1;
    }
    r
}
