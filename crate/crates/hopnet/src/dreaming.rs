//! Unlearning-and-consolidation ("dreaming") dynamics on the coupling matrix.
//!
//! The discrete rule updates the N x N coupling as
//!
//! ```text
//! J(k+1) = J(k) + eps/(1 + eps k) * (J(k) - J(k)^2)
//! ```
//!
//! and can be recast on the P x P pattern-space matrix G(k) through
//! J(k) = (1/N) Xi^T G(k) Xi with G(0) = I:
//!
//! ```text
//! G(k+1) = (1 + p_k) G(k) - p_k G(k) C G(k),   p_k = eps/(1 + eps k).
//! ```
//!
//! Both pictures share the continuous-time limit J(t) = (1+t) J(0) (I + t J(0))^-1,
//! which obeys dJ/dt = (J - J^2)/(1+t) and converges to the projector coupling.
//! Convergence of the discrete recursion holds for unlearning strengths below
//! the critical value eps_c = 1/(||C|| - 1).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{CouplingMatrix, KernelKind};
use crate::linalg;
use crate::patterns::{correlation_matrix, CorrelationMatrix, PatternSet};

/// Iteration is declared divergent when ||G(k)|| exceeds this multiple of its
/// initial value (||G(0)|| = 1).
const DIVERGENCE_FACTOR: f64 = 1e3;

// ============================================================================
// Types
// ============================================================================

/// Parameters of one dreaming run.
#[derive(Debug, Clone, Copy)]
pub struct DreamSchedule {
    /// Unlearning strength eps > 0.
    pub epsilon: f64,
    /// Hard cap on the number of cycles.
    pub max_cycles: usize,
    /// Convergence tolerance on ||G(k) C - I|| (operator norm).
    pub tol: f64,
}

impl DreamSchedule {
    /// Validates eps > 0, max_cycles >= 1, tol > 0.
    pub fn new(epsilon: f64, max_cycles: usize, tol: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "unlearning strength must be positive, got {epsilon}"
            )));
        }
        if max_cycles == 0 {
            return Err(Error::InvalidConfig("max_cycles must be at least 1".into()));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(Self {
            epsilon,
            max_cycles,
            tol,
        })
    }
}

/// Per-cycle telemetry of a dreaming run.
#[derive(Debug, Clone, Copy)]
pub struct DreamCycle {
    /// Cycle index k (state G(k) before the k-th update).
    pub k: usize,
    /// Effective rate eps/(1 + eps k) that the next update will apply.
    pub rate: f64,
    /// Distance to the stationary point: ||G(k) C - I|| in operator norm,
    /// which equals the coupling-space distance ||J(k) - J^p|| on the
    /// pattern subspace.
    pub distance: f64,
    /// Smallest eigenvalue of G(k).
    pub min_eig: f64,
    /// Operator norm of the commutator G(k) C - C G(k).
    pub commutator_norm: f64,
}

/// Full record of a dreaming run.
#[derive(Debug, Clone)]
pub struct DreamTrace {
    /// One record per visited cycle, k strictly increasing from 0.
    pub cycles: Vec<DreamCycle>,
    /// True when the distance dropped to the schedule tolerance.
    pub converged: bool,
    /// Final pattern-space matrix G.
    pub final_g: DMatrix<f64>,
}

impl DreamTrace {
    /// The last recorded cycle.
    pub fn last(&self) -> &DreamCycle {
        self.cycles.last().expect("trace has at least cycle 0")
    }
}

/// Critical unlearning strength from the correlation spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalEpsilon {
    /// eps_c = 1/(||C|| - 1).
    Bounded(f64),
    /// ||C|| = 1 (orthogonal patterns): every strength converges.
    Unbounded,
}

// ============================================================================
// Operations
// ============================================================================

/// Continuous dreaming flow J(t) = (1+t) J(0) (I + t J(0))^-1.
///
/// `j0` must be the Hebbian coupling; the result satisfies
/// dJ/dt = (J - J^2)/(1+t).
pub fn continuous_flow(j0: &CouplingMatrix, t: f64) -> Result<CouplingMatrix> {
    if t < 0.0 {
        return Err(Error::NegativeSleepExtent { t });
    }
    let n = j0.n();
    let b = DMatrix::identity(n, n) + j0.matrix() * t;
    let chol = b.cholesky().ok_or(Error::FactorizationFailed {
        what: "I + t*J(0) flow solve",
    })?;
    let mut j = chol.solve(j0.matrix()) * (1.0 + t);
    linalg::symmetrize(&mut j);
    CouplingMatrix::from_matrix(j, KernelKind::Dream { t }, j0.p())
}

/// One discrete dreaming step in the coupling picture:
/// J(k+1) = J(k) + eps/(1 + eps k) * (J(k) - J(k)^2).
pub fn dream_step(j: &CouplingMatrix, k: usize, eps: f64) -> CouplingMatrix {
    let rate = eps / (1.0 + eps * k as f64);
    let m = j.matrix();
    let mut next = m + (m - m * m) * rate;
    linalg::symmetrize(&mut next);
    CouplingMatrix::from_matrix(next, j.kind(), j.p())
        .expect("symmetric update of a symmetric matrix")
}

/// One discrete dreaming step in the pattern-space picture:
/// G(k+1) = (1 + p_k) G(k) - p_k G(k) C G(k) with p_k = eps/(1 + eps k).
pub fn g_step(g: &DMatrix<f64>, c: &CorrelationMatrix, k: usize, eps: f64) -> DMatrix<f64> {
    let rate = eps / (1.0 + eps * k as f64);
    let mut next = g * (1.0 + rate) - (g * c.matrix() * g) * rate;
    linalg::symmetrize(&mut next);
    next
}

fn cycle_record(g: &DMatrix<f64>, c: &CorrelationMatrix, k: usize, eps: f64) -> DreamCycle {
    let p = g.nrows();
    let gc = g * c.matrix();
    let mut gc_minus_i = gc.clone() - DMatrix::identity(p, p);
    linalg::symmetrize(&mut gc_minus_i);
    let distance = linalg::op_norm_sym(&gc_minus_i);
    let (eigs, _) = linalg::sym_eigen(g);
    let commutator = &gc - gc.transpose();
    // The commutator of two symmetric matrices is antisymmetric; its operator
    // norm equals the largest singular value, computed from the symmetric
    // square.
    let cc = &commutator * commutator.transpose();
    let commutator_norm = linalg::op_norm_sym(&cc).max(0.0).sqrt();
    DreamCycle {
        k,
        rate: eps / (1.0 + eps * k as f64),
        distance,
        min_eig: eigs[0],
        commutator_norm,
    }
}

/// Runs the pattern-space dreaming recursion from G(0) = I.
///
/// Stops when ||G(k) C - I|| <= tol (converged) or the cycle cap is reached
/// (trace returned with `converged = false`). Blow-up beyond 1e3 times the
/// initial norm is reported as [`Error::DreamDivergence`] with the cycle
/// index.
pub fn run_dreaming(ps: &PatternSet, sched: &DreamSchedule) -> Result<DreamTrace> {
    let c = correlation_matrix(ps);
    run_dreaming_with_correlation(&c, sched)
}

/// Same as [`run_dreaming`], starting from an explicit correlation matrix.
pub fn run_dreaming_with_correlation(
    c: &CorrelationMatrix,
    sched: &DreamSchedule,
) -> Result<DreamTrace> {
    let p = c.p();
    let mut g = DMatrix::identity(p, p);
    let mut cycles = Vec::new();
    let mut converged = false;
    for k in 0..=sched.max_cycles {
        let rec = cycle_record(&g, c, k, sched.epsilon);
        let g_norm = linalg::op_norm_sym(&g);
        if !g_norm.is_finite() || !rec.distance.is_finite() || g_norm > DIVERGENCE_FACTOR {
            return Err(Error::DreamDivergence {
                cycle: k,
                norm: g_norm,
            });
        }
        cycles.push(rec);
        if rec.distance <= sched.tol {
            converged = true;
            break;
        }
        if k == sched.max_cycles {
            break;
        }
        g = g_step(&g, c, k, sched.epsilon);
    }
    Ok(DreamTrace {
        cycles,
        converged,
        final_g: g,
    })
}

/// Critical unlearning strength eps_c = 1/(||C|| - 1).
///
/// Returns [`CriticalEpsilon::Unbounded`] when ||C|| = 1 within 1e-12
/// (orthogonal patterns: the recursion starts at its stationary point in
/// every eigenchannel that matters).
pub fn critical_epsilon(c: &CorrelationMatrix) -> CriticalEpsilon {
    let excess = c.norm() - 1.0;
    if excess <= 1e-12 {
        CriticalEpsilon::Unbounded
    } else {
        CriticalEpsilon::Bounded(1.0 / excess)
    }
}

/// Critical strength of field-correlation unlearning: 1/(N ||J(0)||).
///
/// `j0` must be the Hebbian coupling.
pub fn semenov_epsilon(j0: &CouplingMatrix) -> f64 {
    let norm = crate::patterns::spectral_norm(j0.matrix())
        .expect("coupling matrices are symmetric by construction");
    1.0 / (j0.n() as f64 * norm)
}

// ============================================================================
// Tests
// ============================================================================
