//! Gauss-Hermite quadrature for averages over the standard Gaussian measure.
//!
//! Nodes and weights are computed by the Golub-Welsch method: the nodes are
//! the eigenvalues of the symmetric tridiagonal Jacobi matrix of the Hermite
//! recurrence, and the weights follow from the first components of its
//! eigenvectors. The integrands appearing in the self-consistency equations
//! (tanh, sech^2, log cosh of an affine argument) are smooth, so the rule
//! converges spectrally; order 120 leaves errors far below solver tolerances.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A Gauss-Hermite rule pre-mapped to the standard Gaussian measure:
/// integral Dx f(x) ~= sum_i w_i f(x_i) with sum_i w_i = 1.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds the rule with `order` nodes.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig(
                "quadrature order must be at least 1".into(),
            ));
        }
        // Jacobi matrix of the Hermite recurrence (physicists' weight e^{-y^2}):
        // zero diagonal, off-diagonal b_k = sqrt(k/2).
        let mut jac = DMatrix::zeros(order, order);
        for k in 1..order {
            let b = (k as f64 / 2.0).sqrt();
            jac[(k - 1, k)] = b;
            jac[(k, k - 1)] = b;
        }
        let eig = nalgebra::SymmetricEigen::new(jac);
        let mut idx: Vec<usize> = (0..order).collect();
        idx.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .expect("eigenvalues of a real symmetric matrix are finite")
        });
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for &i in &idx {
            // Map y -> x = sqrt(2) y so the weight becomes the standard
            // Gaussian; the physicists' weight sqrt(pi) v0^2 then normalizes
            // to v0^2 with total mass 1.
            nodes.push(std::f64::consts::SQRT_2 * eig.eigenvalues[i]);
            let v0 = eig.eigenvectors[(0, i)];
            weights.push(v0 * v0);
        }
        Ok(Self { nodes, weights })
    }

    /// Quadrature nodes on the standard-Gaussian axis.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights normalized to unit total mass.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Computes `integral Dx f(x)`, failing on non-finite integrand values.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { x });
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

/// Computes `integral Dx f(x)` with a freshly built rule of the given order.
///
/// Long-running solvers build one [`GaussHermite`] instead and reuse it.
pub fn gaussian_integral(f: impl Fn(f64) -> f64, quad_order: usize) -> Result<f64> {
    GaussHermite::new(quad_order)?.integrate(f)
}

/// Numerically stable log(2 cosh(a)).
pub(crate) fn log_two_cosh(a: f64) -> f64 {
    let a = a.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Adaptive Simpson integration, used in tests as an independent oracle
/// against the spectral rule.
#[cfg(test)]
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

// ============================================================================
// Tests
// ============================================================================
