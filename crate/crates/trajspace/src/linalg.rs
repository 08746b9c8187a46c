//! Small dense symmetric kernels: cyclic Jacobi eigendecomposition and an
//! SPD solver for normal equations.
//!
//! Everything here targets matrices no larger than a few dozen rows, where
//! Jacobi sweeps are exact, deterministic and fast.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Result of [`symmetric_eigen`]: eigenvalues in descending order with the
/// matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input must be symmetric to 1e-9 (relative to its largest entry).
/// Convergence: off-diagonal Frobenius norm below `1e-12 * ||G||_F`,
/// capped at 100 sweeps.
pub fn symmetric_eigen(g: &DMatrix<f64>) -> Result<SymmetricEigen> {
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return Err(Error::argument(format!(
            "expected a non-empty square matrix, got {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let scale = g.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-9 * scale {
                return Err(Error::argument(format!(
                    "matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }

    let mut a = g.clone();
    // Work on an exactly symmetric copy so rotations stay consistent.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = m;
            a[(j, i)] = m;
        }
    }
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm();
    let tol = 1e-12 * norm;

    let mut converged = norm == 0.0;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Stable rotation choice (Golub & Van Loan, §8.5).
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > tol {
        return Err(Error::numeric(format!(
            "Jacobi sweeps did not converge within {MAX_SWEEPS} iterations"
        )));
    }

    // Sort descending; the sort is stable so degenerate eigenvalues keep the
    // order the sweeps produced.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[(src, src)];
        vectors.set_column(dst, &v.column(src));
    }
    Ok(SymmetricEigen { values, vectors })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Solve `A x = b` for symmetric positive definite `A` via Cholesky.
///
/// Falls back to an eigendecomposition-based solve when the Cholesky factor
/// signals poor conditioning; a rank-deficient system is a numeric error.
pub fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::shape(format!(
            "solve_spd: A is {}x{}, b has length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }

    if let Some(x) = cholesky_solve(a, b) {
        return Ok(x);
    }

    // Pivot-free fallback: spectral solve with explicit rank check.
    let eig = symmetric_eigen(a)?;
    let lmax = eig.values[0].max(0.0);
    let lmin = eig.values[n - 1];
    if lmin <= 0.0 || lmax / lmin > 1e12 {
        return Err(Error::numeric(
            "normal equations are rank deficient".to_string(),
        ));
    }
    let mut y = DVector::zeros(n);
    for i in 0..n {
        y[i] = eig.vectors.column(i).dot(b) / eig.values[i];
    }
    Ok(&eig.vectors * y)
}

/// Plain Cholesky with a conditioning guard on the pivots. Returns `None`
/// when a pivot is non-positive or the pivot ratio estimate exceeds 1e10.
fn cholesky_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    let mut max_piv = f64::MIN;
    let mut min_piv = f64::MAX;
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return None;
        }
        max_piv = max_piv.max(d);
        min_piv = min_piv.min(d);
        if max_piv / min_piv > 1e10 {
            return None;
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    // Forward then back substitution.
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = DVector::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Some(x)
}
