//! Small dense symmetric-matrix routines used by the solvers and the
//! projection operator.
//!
//! Everything here works on matrices of at most a few dozen rows (feature
//! grams, anchor grams), where a cyclic Jacobi eigendecomposition is fast,
//! deterministic and accurate to near machine precision. Avoiding an
//! external LAPACK keeps results bitwise reproducible across builds.

use ndarray::{Array1, Array2};

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, so
/// `m = V diag(vals) V^T`. Eigenvalues are not sorted.
pub(crate) fn jacobi_eigh(m: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "jacobi_eigh needs a square matrix");
    let mut a = m.clone();
    let mut v: Array2<f64> = Array2::eye(n);
    if n <= 1 {
        return (a.diag().to_owned(), v);
    }

    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diag().to_owned(), v)
}

/// Moore-Penrose pseudo-inverse of a symmetric positive semi-definite matrix.
///
/// Eigenvalues below `n * eps * lambda_max` are treated as zero, which is what
/// makes rank-deficient grams (empty anchor groups, collinear features) safe.
pub(crate) fn sym_pinv(m: &Array2<f64>) -> Array2<f64> {
    let (vals, vecs) = jacobi_eigh(m);
    let n = m.nrows();
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = lmax * n as f64 * f64::EPSILON;
    let inv: Array1<f64> = vals.mapv(|l| if l > cutoff { 1.0 / l } else { 0.0 });
    let scaled = &vecs * &inv; // scales column j of V by inv[j]
    scaled.dot(&vecs.t())
}

/// Solves `(g + ridge I) b = rhs` for symmetric PSD `g`.
///
/// With `ridge == 0` this is the pseudo-inverse solve, i.e. the minimum-norm
/// least-squares solution when `g` is singular.
pub(crate) fn sym_solve(g: &Array2<f64>, rhs: &Array1<f64>, ridge: f64) -> Array1<f64> {
    let (vals, vecs) = jacobi_eigh(g);
    let n = g.nrows();
    let lmax = vals.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = lmax * n as f64 * f64::EPSILON;
    let vt_rhs = vecs.t().dot(rhs);
    let scaled: Array1<f64> = vals
        .iter()
        .zip(vt_rhs.iter())
        .map(|(&l, &r)| {
            if ridge > 0.0 {
                r / (l.max(0.0) + ridge)
            } else if l > cutoff {
                r / l
            } else {
                0.0
            }
        })
        .collect();
    vecs.dot(&scaled)
}
