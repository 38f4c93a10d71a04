//! Independent reference solver for the classic (no-dreaming) network.
//!
//! The t = 0 thermodynamics is the textbook replica-symmetric theory of the
//! Hebbian network: two coupled equations for (m, q) plus the conjugate
//! r = q / (1 - beta(1-q))^2. This module is coded directly from that
//! two-equation form, independently of the full five-parameter solver, and
//! serves as its cross-check oracle in the t -> 0 limit.

use crate::error::{Error, Result};
use crate::meanfield::quadrature::{log_two_cosh, GaussHermite};
use crate::meanfield::{SeedBranch, SolverConfig};

/// Solution of the classic two-equation system.
#[derive(Debug, Clone, Copy)]
pub struct AgsSolution {
    /// Mattis magnetization.
    pub m: f64,
    /// Edwards-Anderson overlap.
    pub q: f64,
    /// Conjugate overlap r = q / (1 - beta(1-q))^2.
    pub r: f64,
}

/// Solves the classic two-equation system on the configured branch.
///
/// The retrieval branch iterates m = <tanh beta(m + sqrt(alpha r) x)>,
/// q = <tanh^2 ...> with damping from a nearly saturated start. The glassy
/// branch sets m = 0, which reduces the system to a single equation in q
/// solved by bisection on (1 - 1/beta, 1); the bisection degenerates to
/// q = 0 above the glass temperature.
pub fn solve_ags(alpha: f64, beta: f64, cfg: &SolverConfig) -> Result<AgsSolution> {
    cfg.validate()?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("load must be >= 0, got {alpha}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    let quad = GaussHermite::new(cfg.quad_order)?;
    match cfg.seed_branch {
        SeedBranch::Retrieval => {
            // Seed nearly saturated: at low temperature the m = 0 basin
            // swallows moderate starts, while (1, 1) sits inside the
            // retrieval basin wherever the branch exists. The undamped map
            // oscillates at low temperature, so retry over a descending
            // damping ladder (quartering the new-iterate weight).
            let seed = (1.0 - 1e-6, 1.0 - 1e-6);
            let mut damping = cfg.damping;
            let mut domain_exit = None;
            let mut residual = f64::NAN;
            while damping >= 1e-3 {
                match iterate(alpha, beta, seed, damping, cfg.tol, cfg.max_iter, &quad) {
                    Outcome::Converged(m, q) => return Ok(pack(m, q, beta)),
                    Outcome::DomainExit(d) => domain_exit = Some(d),
                    Outcome::MaxIter(r) => {
                        residual = r;
                        domain_exit = None;
                    }
                }
                damping /= 4.0;
            }
            match domain_exit {
                Some(value) => Err(Error::DomainViolation {
                    factor: "1 - beta(1 - q)",
                    value,
                }),
                None => Err(Error::NonConvergence {
                    iterations: cfg.max_iter,
                    residual,
                }),
            }
        }
        SeedBranch::SpinGlass => Ok(pack(0.0, sg_overlap(alpha, beta, &quad), beta)),
    }
}

/// Glassy overlap at m = 0 by bisection.
///
/// g(q) = <tanh^2(beta sqrt(alpha q)/D0 x)> - q changes sign between the
/// domain wall D0 = 0+ (where g = 1/beta > 0) and q = 1 (where g < 0);
/// g <= 0 already at the wall means only the trivial q = 0 solution exists,
/// which happens exactly above the glass temperature.
pub(crate) fn sg_overlap(alpha: f64, beta: f64, quad: &GaussHermite) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let tanh2 = |u: f64| {
        let mut acc = 0.0;
        for (&x, &w) in quad.nodes().iter().zip(quad.weights()) {
            let th = (u * x).tanh();
            acc += w * th * th;
        }
        acc
    };
    let g = |q: f64| {
        let d0 = 1.0 - beta * (1.0 - q);
        tanh2(beta * (alpha * q).sqrt() / d0) - q
    };
    let mut lo = (1.0 - 1.0 / beta).max(0.0) + 1e-13;
    let mut hi = 1.0 - 1e-15;
    if g(lo) <= 0.0 {
        return 0.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

enum Outcome {
    Converged(f64, f64),
    DomainExit(f64),
    MaxIter(f64),
}

fn iterate(
    alpha: f64,
    beta: f64,
    seed: (f64, f64),
    damping: f64,
    tol: f64,
    max_iter: usize,
    quad: &GaussHermite,
) -> Outcome {
    let (mut m, mut q) = seed;
    let mut err = f64::INFINITY;
    for _ in 0..max_iter {
        let d0 = 1.0 - beta * (1.0 - q);
        if d0 <= 1e-10 || !d0.is_finite() {
            return Outcome::DomainExit(d0);
        }
        let r = q / (d0 * d0);
        let noise = (alpha * r).max(0.0).sqrt();
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        for (&x, &w) in quad.nodes().iter().zip(quad.weights()) {
            let th = (beta * (m + noise * x)).tanh();
            i1 += w * th;
            i2 += w * th * th;
        }
        err = (i1 - m).abs().max((i2 - q).abs());
        m += damping * (i1 - m);
        q += damping * (i2 - q);
        if err < tol {
            return Outcome::Converged(m, q);
        }
    }
    Outcome::MaxIter(err)
}

fn pack(m: f64, q: f64, beta: f64) -> AgsSolution {
    let d0 = 1.0 - beta * (1.0 - q);
    AgsSolution {
        m: m.abs(),
        q,
        r: q / (d0 * d0),
    }
}

/// Free energy of the classic network at a solution of [`solve_ags`],
/// with the same additive-constant convention as the full free energy.
pub fn ags_free_energy(sol: &AgsSolution, alpha: f64, beta: f64) -> Result<f64> {
    let quad = GaussHermite::new(120)?;
    let d0 = 1.0 - beta * (1.0 - sol.q);
    if d0 <= 0.0 {
        return Err(Error::DomainViolation {
            factor: "1 - beta(1 - q)",
            value: d0,
        });
    }
    let noise = (alpha * sol.r).max(0.0).sqrt();
    let m = sol.m;
    let lc = quad.integrate(|x| log_two_cosh(beta * (m + noise * x)))?;
    Ok(m * m / 2.0 + 0.5 * alpha * beta * sol.r * (1.0 - sol.q) + alpha / (2.0 * beta) * d0.ln()
        - 0.5 * alpha * sol.q / d0
        - lc / beta)
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tanh_fixed_point(beta: f64) -> f64 {
        // Bisection for m = tanh(beta m), m > 0 (requires beta > 1).
        let f = |m: f64| (beta * m).tanh() - m;
        let (mut lo, mut hi) = (1e-9, 1.0);
        assert!(f(lo) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_load_magnetization_matches_scalar_fixed_point() {
        let cfg = SolverConfig::default();
        let sol = solve_ags(0.0, 2.0, &cfg).unwrap();
        let oracle = tanh_fixed_point(2.0);
        assert_abs_diff_eq!(sol.m, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.m, 0.9575, epsilon = 1e-4);
        assert_abs_diff_eq!(sol.q, sol.m * sol.m, epsilon = 1e-9);
    }

    #[test]
    fn zero_load_paramagnetic_below_unit_coupling() {
        let cfg = SolverConfig::default();
        let sol = solve_ags(0.0, 0.9, &cfg).unwrap();
        assert!(sol.m.abs() <= 1e-6);
        assert!(sol.q.abs() <= 1e-6);
    }

    #[test]
    fn retrieval_survives_at_moderate_load_and_cold_temperature() {
        let cfg = SolverConfig::default();
        let sol = solve_ags(0.05, 1.0 / 0.2, &cfg).unwrap();
        assert!(sol.m > 0.9, "m = {}", sol.m);
        assert!(sol.q > sol.m * sol.m - 1e-6);
    }

    #[test]
    fn spin_glass_branch_has_zero_magnetization() {
        let cfg = SolverConfig::default().with_branch(SeedBranch::SpinGlass);
        let sol = solve_ags(0.08, 5.0, &cfg).unwrap();
        assert_abs_diff_eq!(sol.m, 0.0);
        assert_abs_diff_eq!(sol.q, 0.851126398, epsilon = 1e-6);
        // Residual of the q-equation at the bisected point.
        let quad = GaussHermite::new(120).unwrap();
        let noise = (0.08 * sol.r).sqrt();
        let q_back = quad
            .integrate(|x| (5.0 * noise * x).tanh().powi(2))
            .unwrap();
        assert_abs_diff_eq!(q_back, sol.q, epsilon = 1e-10);
    }

    #[test]
    fn glass_onset_sits_above_unit_temperature() {
        // The m = 0 overlap turns on at T_g = 1 + sqrt(alpha).
        let alpha = 0.09;
        let t_g = 1.3;
        let cfg = SolverConfig::default().with_branch(SeedBranch::SpinGlass);
        let above = solve_ags(alpha, 1.0 / (t_g + 0.03), &cfg).unwrap();
        let below = solve_ags(alpha, 1.0 / (t_g - 0.03), &cfg).unwrap();
        assert_abs_diff_eq!(above.q, 0.0);
        assert!(below.q > 1e-3, "q = {}", below.q);
    }

    #[test]
    fn free_energy_zero_load_closed_form() {
        let cfg = SolverConfig::default();
        let beta = 2.0;
        let sol = solve_ags(0.0, beta, &cfg).unwrap();
        let a = ags_free_energy(&sol, 0.0, beta).unwrap();
        let expect =
            sol.m * sol.m / 2.0 - (beta * sol.m).cosh().ln() / beta - 2f64.ln() / beta;
        assert_abs_diff_eq!(a, expect, epsilon = 1e-12);
    }

    #[test]
    fn retrieval_branch_dominates_at_low_load() {
        let cfg = SolverConfig::default();
        let beta = 2.0;
        let ret = solve_ags(1e-4, beta, &cfg).unwrap();
        let sg = solve_ags(1e-4, beta, &cfg.with_branch(SeedBranch::SpinGlass)).unwrap();
        let a_ret = ags_free_energy(&ret, 1e-4, beta).unwrap();
        let a_sg = ags_free_energy(&sg, 1e-4, beta).unwrap();
        assert!(
            a_ret < a_sg,
            "retrieval {a_ret} should lie below spin glass {a_sg}"
        );
        assert_abs_diff_eq!(a_ret - a_sg, -0.0868, epsilon = 5e-3);
    }

    #[test]
    fn bifurcation_pinned_at_unit_temperature() {
        // The zero-load transition sits at T = 1: magnetized just below,
        // paramagnetic just above.
        let cfg = SolverConfig::default();
        let cold = solve_ags(0.0, 1.0 / 0.97, &cfg).unwrap();
        let hot = solve_ags(0.0, 1.0 / 1.03, &cfg).unwrap();
        assert!(cold.m > 0.05, "m = {}", cold.m);
        assert!(hot.m < 1e-6, "m = {}", hot.m);
    }
}
