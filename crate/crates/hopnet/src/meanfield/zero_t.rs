//! Zero-temperature limit of the self-consistency equations, storage
//! capacity, and the capacity-gain sigmoid fit.
//!
//! In the beta -> infinity limit the thermal integrals collapse to error
//! functions and the five equations close over the rescaled state
//! (mu, Pi, Delta, c):
//!
//! ```text
//! Delta' = 1 + alpha t / (1 - (1+t) c)
//! g      = sqrt(2/(pi alpha)) exp(-mu^2/alpha)
//! c'     = Pi g / Delta' - t / (Delta' (1+t))
//! E      = (1+t) erf(mu/sqrt(alpha)) / (Delta' + t)
//! Pi'    = positive root of A x^2 + B x + C = 0 with
//!          A = (1+t)^2 - E^2 t (t + 2 Delta')
//!          B = -2 alpha t (1+t) g
//!          C = alpha t^2 - (Delta' D')^2,   D' = 1 - (1+t) c'
//! mu'    = Pi' E / sqrt(2)
//! ```
//!
//! E is the magnetization itself; the magnetized branch exists only below a
//! t-dependent critical load, located here by upward continuation in alpha
//! with step halving. A vanishing discriminant (or a sign loss in one of the
//! denominators) is exactly how the branch disappears, so those events are
//! reported as "no solution", not as errors.

use crate::error::{Error, Result};
use crate::meanfield::SolverConfig;
use std::f64::consts::PI;

/// Zero-temperature order parameters.
#[derive(Debug, Clone, Copy)]
pub struct ZeroTParams {
    /// Rescaled magnetization m / sqrt(2 p).
    pub mu: f64,
    /// Inverse noise scale 1 / sqrt(p).
    pub pi: f64,
    /// Conjugate-diagonal combination Delta (same object as at finite
    /// temperature).
    pub delta: f64,
    /// Zero-temperature limit of beta (Q - q).
    pub c: f64,
}

type State = [f64; 4];

enum ZeroOutcome {
    Converged(State),
    /// Domain exit or negative discriminant: the branch does not exist here.
    Vanished,
    MaxIter(f64),
}

fn default_seed(t: f64) -> State {
    [
        (1.0 + t) / 2f64.sqrt(),
        1.0 + t,
        1.0,
        -t / (t + 1.0),
    ]
}

fn iterate(
    alpha: f64,
    t: f64,
    start: State,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> ZeroOutcome {
    let [mut mu, mut pi, mut delta, mut c] = start;
    let one_t = 1.0 + t;
    let mut err = f64::INFINITY;
    for _ in 0..max_iter {
        let d = 1.0 - one_t * c;
        if d <= 1e-12 {
            return ZeroOutcome::Vanished;
        }
        let delta_n = 1.0 + alpha * t / d;
        let ex = mu * mu / alpha;
        let g = (2.0 / (PI * alpha)).sqrt() * if ex < 700.0 { (-ex).exp() } else { 0.0 };
        let c_n = pi * g / delta_n - t / (delta_n * one_t);
        let d_n = 1.0 - one_t * c_n;
        if d_n <= 1e-12 {
            return ZeroOutcome::Vanished;
        }
        let e = one_t * libm::erf(mu / alpha.sqrt()) / (delta_n + t);
        let a = one_t * one_t - e * e * t * (t + 2.0 * delta_n);
        let b = -2.0 * alpha * t * one_t * g;
        let cc = alpha * t * t - (delta_n * d_n) * (delta_n * d_n);
        let disc = b * b - 4.0 * a * cc;
        if disc < 0.0 || a <= 0.0 {
            return ZeroOutcome::Vanished;
        }
        let pi_n = (-b + disc.sqrt()) / (2.0 * a);
        let mu_n = pi_n * e / 2f64.sqrt();
        err = (mu_n - mu)
            .abs()
            .max((pi_n - pi).abs())
            .max((delta_n - delta).abs())
            .max((c_n - c).abs());
        mu += damping * (mu_n - mu);
        pi += damping * (pi_n - pi);
        delta += damping * (delta_n - delta);
        c += damping * (c_n - c);
        if err < tol * (1.0 + mu.abs() + pi.abs()) {
            return ZeroOutcome::Converged([mu, pi, delta, c]);
        }
    }
    ZeroOutcome::MaxIter(err)
}

fn check_inputs(alpha: f64, t: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "load must be positive, got {alpha}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeSleepExtent { t });
    }
    Ok(())
}

fn pack(state: State) -> ZeroTParams {
    let [mu, pi, delta, c] = state;
    ZeroTParams { mu, pi, delta, c }
}

const MARCH_ANCHOR: f64 = 0.002;
const MARCH_STEP: f64 = 0.02;
const MARCH_MIN_STEP: f64 = 2.5e-4;
const MU_ALIVE: f64 = 1e-3;

/// Solves the zero-temperature equations on the magnetized branch at
/// (alpha, t).
///
/// Returns `Ok(None)` when the branch does not exist there (the load exceeds
/// the critical capacity), reaching the target by continuation in alpha from
/// a small anchor load where the default seed always lands on the branch.
pub fn solve_zero_t(alpha: f64, t: f64, cfg: &SolverConfig) -> Result<Option<ZeroTParams>> {
    cfg.validate()?;
    check_inputs(alpha, t)?;
    let anchor = alpha.min(MARCH_ANCHOR);
    let mut state = match iterate(
        anchor,
        t,
        default_seed(t),
        cfg.damping,
        cfg.tol,
        cfg.max_iter,
    ) {
        ZeroOutcome::Converged(s) => s,
        ZeroOutcome::Vanished => return Ok(None),
        ZeroOutcome::MaxIter(residual) => {
            return Err(Error::NonConvergence {
                iterations: cfg.max_iter,
                residual,
            })
        }
    };
    if alpha <= MARCH_ANCHOR {
        return Ok(Some(pack(state)));
    }
    let mut a_cur = anchor;
    let mut step = MARCH_STEP;
    while step >= MARCH_MIN_STEP {
        let a_try = (a_cur + step).min(alpha);
        match iterate(a_try, t, state, cfg.damping, cfg.tol, cfg.max_iter) {
            ZeroOutcome::Converged(s) if s[0] > MU_ALIVE => {
                a_cur = a_try;
                state = s;
                if a_cur >= alpha {
                    return Ok(Some(pack(state)));
                }
            }
            _ => step *= 0.5,
        }
    }
    Ok(None)
}

/// Critical storage capacity at sleep extent t: the largest load at which
/// the magnetized zero-temperature branch still exists, located by upward
/// continuation with step halving down to a resolution of 2.5e-4.
pub fn critical_capacity(t: f64, cfg: &SolverConfig) -> Result<f64> {
    cfg.validate()?;
    if !(t >= 0.0) {
        return Err(Error::NegativeSleepExtent { t });
    }
    let mut state = match iterate(
        MARCH_ANCHOR,
        t,
        default_seed(t),
        cfg.damping,
        cfg.tol,
        cfg.max_iter,
    ) {
        ZeroOutcome::Converged(s) => s,
        ZeroOutcome::Vanished => {
            return Err(Error::NonConvergence {
                iterations: cfg.max_iter,
                residual: f64::NAN,
            })
        }
        ZeroOutcome::MaxIter(residual) => {
            return Err(Error::NonConvergence {
                iterations: cfg.max_iter,
                residual,
            })
        }
    };
    let mut a_cur = MARCH_ANCHOR;
    let mut step = MARCH_STEP;
    while step >= MARCH_MIN_STEP {
        let a_try = a_cur + step;
        match iterate(a_try, t, state, cfg.damping, cfg.tol, cfg.max_iter) {
            ZeroOutcome::Converged(s) if s[0] > MU_ALIVE => {
                a_cur = a_try;
                state = s;
            }
            _ => step *= 0.5,
        }
    }
    Ok(a_cur)
}

/// Least-squares fit of normalized capacity gain against the saturating form
/// y = t / (t + a).
///
/// The values are min-max normalized over the given points before fitting;
/// the single parameter a is the root of the derivative of the squared
/// residual sum, bracketed on a log grid and refined by bisection. Fewer
/// than three points, or a flat value set, cannot constrain the fit and are
/// rejected as [`Error::DegenerateFit`].
pub fn capacity_sigmoid_fit(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points to constrain the fit, got {}",
            points.len()
        )));
    }
    for &(x, v) in points {
        if !(x >= 0.0 && x.is_finite() && v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "fit points need finite values and extents >= 0, got ({x}, {v})"
            )));
        }
    }
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        return Err(Error::DegenerateFit(
            "flat capacity values cannot be normalized to [0, 1]".into(),
        ));
    }
    let normalized: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, v)| (x, (v - lo) / (hi - lo)))
        .collect();
    // d/da of sum (y - x/(x+a))^2, up to a positive factor.
    let slope = |a: f64| -> f64 {
        normalized
            .iter()
            .map(|&(x, y)| (y - x / (x + a)) * x / ((x + a) * (x + a)))
            .sum()
    };
    let objective = |a: f64| -> f64 {
        normalized
            .iter()
            .map(|&(x, y)| {
                let r = y - x / (x + a);
                r * r
            })
            .sum()
    };
    // Bracket a sign change of the derivative on a logarithmic scan.
    const DECADES: f64 = 12.0; // 1e-6 ..= 1e6
    const PER_DECADE: usize = 40;
    let n_scan = (DECADES * PER_DECADE as f64) as usize;
    let grid_a = |i: usize| 10f64.powf(-6.0 + i as f64 / PER_DECADE as f64);
    let mut bracket = None;
    let mut prev = (grid_a(0), slope(grid_a(0)));
    for i in 1..=n_scan {
        let a = grid_a(i);
        let s = slope(a);
        if prev.1 == 0.0 {
            bracket = Some((prev.0, prev.0));
            break;
        }
        if s == 0.0 || s.signum() != prev.1.signum() {
            bracket = Some((prev.0, a));
            break;
        }
        prev = (a, s);
    }
    match bracket {
        Some((mut a_lo, mut a_hi)) => {
            let s_lo = slope(a_lo);
            for _ in 0..200 {
                let mid = 0.5 * (a_lo + a_hi);
                if slope(mid).signum() == s_lo.signum() {
                    a_lo = mid;
                } else {
                    a_hi = mid;
                }
            }
            Ok(0.5 * (a_lo + a_hi))
        }
        // Monotone derivative over the whole scan: best endpoint wins.
        None => {
            let (a0, a1) = (grid_a(0), grid_a(n_scan));
            Ok(if objective(a0) <= objective(a1) { a0 } else { a1 })
        }
    }
}

// ============================================================================
// Tests
// ============================================================================
