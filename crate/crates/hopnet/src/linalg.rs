//! Internal dense linear-algebra helpers shared by the kernel and dreaming
//! modules: symmetry enforcement, symmetric eigendecompositions, and
//! operator norms of symmetric matrices.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Replaces `m` by `(m + m^T)/2`.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Maximum absolute deviation from symmetry.
pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Errors unless `m` is square and symmetric to `tol`.
pub(crate) fn require_symmetric(m: &DMatrix<f64>, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let asym = max_asymmetry(m);
    if asym > tol {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

/// Eigenvalues and orthonormal eigenvectors of a symmetric matrix,
/// eigenvalues in ascending order.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Operator (spectral) norm of a symmetric matrix: max |eigenvalue|.
pub(crate) fn op_norm_sym(m: &DMatrix<f64>) -> f64 {
    let (values, _) = sym_eigen(m);
    values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
}

/// Largest eigenvalue of a symmetric positive semi-definite matrix by power
/// iteration with a deterministic start vector.
///
/// Returns `None` when the Rayleigh quotient has not stabilized to
/// `rel_tol` within `max_iter` iterations.
pub(crate) fn power_iteration_max_eig(
    m: &DMatrix<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> Option<f64> {
    let n = m.nrows();
    if n == 0 {
        return Some(0.0);
    }
    // Deterministic start with all signs positive and mild modulation so the
    // vector is never orthogonal to the top eigenspace of a PSD matrix that
    // has any positive row sums; the modulation avoids special alignments.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * ((i + 1) as f64).sin());
    v /= v.norm();
    let mut lambda = 0.0f64;
    for _ in 0..max_iter {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Some(0.0);
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= rel_tol * next.abs().max(1e-300) {
            return Some(next);
        }
        lambda = next;
    }
    None
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetrize_averages_off_diagonal() {
        let mut m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 4.0, 3.0]);
        symmetrize(&mut m);
        assert_abs_diff_eq!(m[(0, 1)], 3.0);
        assert_abs_diff_eq!(m[(1, 0)], 3.0);
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let (vals, vecs) = sym_eigen(&m);
        assert_abs_diff_eq!(vals[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.5, epsilon = 1e-12);
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert_abs_diff_eq!((recon - m).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn power_iteration_matches_dense() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0]);
        let dense = op_norm_sym(&m);
        let power = power_iteration_max_eig(&m, 1e-14, 100_000).unwrap();
        assert_abs_diff_eq!(dense, power, epsilon = 1e-10);
    }
}
