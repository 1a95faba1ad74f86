//! Small dense linear algebra kernels used by the regression solvers.
//!
//! The systems here are tiny (N is the basis size, typically well under a
//! hundred), so plain textbook algorithms are used: lower Cholesky with an
//! explicit pivot check, Householder QR for least squares, and cyclic Jacobi
//! for symmetric eigenvalues. Keeping these in-crate lets error paths report
//! the exact failing pivot instead of a generic decomposition failure.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Fails with the offending pivot when the matrix is not (numerically)
/// positive definite.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(n, a.ncols());
    let max_diag = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max);
    let tiny = f64::EPSILON * max_diag * n as f64;

    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > tiny) {
            return Err(Error::IllConditioned { pivot: d, index: j });
        }
        let dj = d.sqrt();
        l[[j, j]] = dj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / dj;
        }
    }
    Ok(l)
}

/// Row-major copy for the tight substitution loops.
pub fn flatten(a: &Array2<f64>) -> Vec<f64> {
    a.iter().cloned().collect()
}

/// Solves `L x = b` in place for lower-triangular `L` given row-major.
pub fn forward_substitute(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let row = &l[i * n..i * n + i];
        let mut s = b[i];
        for (k, &lik) in row.iter().enumerate() {
            s -= lik * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Least-squares solution of `A x = b` (rows >= cols) via Householder QR.
///
/// Refuses rank-deficient systems: if any diagonal of R falls below
/// `max |R_ii| * max(rows, cols) * eps` the offending index and pivot are
/// reported instead of silently regularizing.
pub fn qr_least_squares(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let m = a.nrows();
    let n = a.ncols();
    if m < n {
        return Err(Error::Underdetermined { rows: m, cols: n });
    }
    let mut r = a.clone();
    let mut y = b.to_vec();

    // Householder reflections applied column by column; R accumulates in
    // the upper triangle while y carries Q^T b.
    for k in 0..n {
        let mut norm = 0.0;
        for i in k..m {
            norm += r[[i, k]] * r[[i, k]];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient { pivot: 0.0, index: k });
        }
        let alpha = if r[[k, k]] >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m - k];
        v[0] = r[[k, k]] - alpha;
        for i in (k + 1)..m {
            v[i - k] = r[[i, k]];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        r[[k, k]] = alpha;
        for i in (k + 1)..m {
            r[[i, k]] = 0.0;
        }
        if vtv == 0.0 {
            continue;
        }
        for j in (k + 1)..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * r[[i, j]];
            }
            let scale = 2.0 * dot / vtv;
            for i in k..m {
                r[[i, j]] -= scale * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..m {
            dot += v[i - k] * y[i];
        }
        let scale = 2.0 * dot / vtv;
        for i in k..m {
            y[i] -= scale * v[i - k];
        }
    }

    let max_pivot = (0..n).map(|i| r[[i, i]].abs()).fold(0.0, f64::max);
    let tol = max_pivot * m.max(n) as f64 * f64::EPSILON;
    for k in 0..n {
        if r[[k, k]].abs() <= tol {
            return Err(Error::RankDeficient {
                pivot: r[[k, k]].abs(),
                index: k,
            });
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= r[[i, j]] * x[j];
        }
        x[i] = s / r[[i, i]];
    }
    Ok(Array1::from_vec(x))
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = flatten(a);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += m[i * n + i] * m[i * n + i];
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + diag.sqrt()) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Two-norm condition number of a symmetric matrix; infinite when the
/// smallest eigenvalue is not strictly positive.
pub fn symmetric_condition(a: &Array2<f64>) -> f64 {
    let eig = symmetric_eigenvalues(a);
    let max = eig.iter().cloned().fold(f64::MIN, f64::max);
    let min = eig.iter().cloned().fold(f64::MAX, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
