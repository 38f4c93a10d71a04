//! Replica-symmetric mean-field theory of the dreamed network.
//!
//! The thermodynamics of the model is controlled by five order parameters:
//! the Mattis magnetization `m`, the off-diagonal overlap `q`, the diagonal
//! overlap `Q`, the conjugate overlap `p`, and the combination
//! `Delta = 1 + alpha beta t (P_conj - p)/(1+t)` through which the conjugate
//! diagonal enters. This module provides:
//!
//! - Gaussian quadrature utilities ([`quadrature`]),
//! - the finite-temperature self-consistency solver and free energy
//!   ([`finite_t`]),
//! - the classic zero-sleep reference solver used as an independent
//!   cross-check ([`ags`]),
//! - the zero-temperature recast equations, critical capacity, and the
//!   capacity sigmoid fit ([`zero_t`]),
//! - phase-boundary tracing and phase classification ([`lines`]).

pub mod ags;
pub mod finite_t;
pub mod lines;
pub mod quadrature;
pub mod zero_t;

pub use ags::{ags_free_energy, solve_ags, AgsSolution};
pub use finite_t::{rs_free_energy, solve_finite_t, solve_finite_t_from, OrderParams};
pub use lines::{classify_phase, find_tc, reduced_models_tc, tc_line, tr_line, PhasePoint, PhaseTag};
pub use quadrature::{gaussian_integral, GaussHermite};
pub use zero_t::{capacity_sigmoid_fit, critical_capacity, solve_zero_t, ZeroTParams};

use crate::error::{Error, Result};

/// Which self-consistent branch a solver should seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedBranch {
    /// Pattern-condensed branch (m > 0).
    Retrieval,
    /// Glassy branch (m = 0, q > 0).
    SpinGlass,
}

/// Knobs of the damped fixed-point solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Weight of the new iterate in the damped mix, in (0, 1].
    pub damping: f64,
    /// Convergence tolerance on the residual before damping.
    pub tol: f64,
    /// Iteration cap per fixed-point solve.
    pub max_iter: usize,
    /// Gauss-Hermite node count (>= 20).
    pub quad_order: usize,
    /// Branch seed.
    pub seed_branch: SeedBranch,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-12,
            max_iter: 200_000,
            quad_order: 120,
            seed_branch: SeedBranch::Retrieval,
        }
    }
}

impl SolverConfig {
    /// A copy seeded on the given branch.
    pub fn with_branch(mut self, branch: SeedBranch) -> Self {
        self.seed_branch = branch;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if self.quad_order < 20 {
            return Err(Error::InvalidConfig(format!(
                "quadrature order must be at least 20, got {}",
                self.quad_order
            )));
        }
        Ok(())
    }
}
