//! Finite-temperature self-consistency solver and replica-symmetric free
//! energy.
//!
//! The five coupled equations are iterated in the reparametrized state
//! (m, q, s, p) with s = beta(1+t)(q - Q), so the replica denominator
//! D = 1 - beta(1+t)(Q - q) = 1 + s stays O(1) at every temperature. One
//! damped sweep reads
//!
//! ```text
//! D   = 1 + s
//! p'  = q (1+t)^2 / D^2
//! Dl' = 1 + alpha t / D
//! I1  = int Dx tanh[(beta/Dl')(m + sqrt(alpha p') x)]
//! I2  = int Dx sech^2[ same argument ]
//! m'  = (1+t) I1 / (Dl' + t)
//! s'  = t/Dl' - beta (1+t) I2 / Dl'^2
//! Q'  = [1 - t Dl'/(beta(1+t)) + alpha p' t^2/(1+t)^2
//!        - m'^2 t (t+2 Dl')/(1+t)^2 - 2 alpha beta p' t I2/((1+t) Dl')] / Dl'^2
//! q'  = Q' + s'/(beta(1+t))
//! ```
//!
//! At t = 0 this is exactly the classic system with s = -beta(1-q).
//!
//! Cold starts walk onto the requested branch by continuation: the retrieval
//! branch is reached by a sleep-extent march at small load followed by a load
//! march at the target (beta, t); the glassy branch by a temperature march
//! from the high-temperature side, where the m = 0 state is soft.

use crate::error::{Error, Result};
use crate::meanfield::quadrature::{log_two_cosh, GaussHermite};
use crate::meanfield::{SeedBranch, SolverConfig};

/// The five order parameters of the replica-symmetric theory.
///
/// The conjugate diagonal enters physics only through
/// `delta = 1 + alpha beta t (P_conj - p)/(1+t)` and is therefore not stored
/// on its own.
#[derive(Debug, Clone, Copy)]
pub struct OrderParams {
    /// Mattis magnetization (sign gauge: solvers return m >= 0).
    pub m: f64,
    /// Off-diagonal (thermal) overlap.
    pub q: f64,
    /// Diagonal overlap Q.
    pub big_q: f64,
    /// Conjugate overlap p.
    pub p: f64,
    /// Conjugate-diagonal combination Delta.
    pub delta: f64,
}

impl OrderParams {
    /// Replica denominator D = 1 - beta(1+t)(Q - q).
    pub fn replica_denominator(&self, beta: f64, t: f64) -> f64 {
        1.0 - beta * (1.0 + t) * (self.big_q - self.q)
    }
}

/// Iteration state (m, q, s, p).
type State = [f64; 4];

enum Outcome {
    Converged(State),
    DomainExit(f64),
    MaxIter(f64),
}

const DOMAIN_FLOOR: f64 = 1e-10;

fn iterate(
    alpha: f64,
    beta: f64,
    t: f64,
    start: State,
    damping: f64,
    tol: f64,
    max_iter: usize,
    quad: &GaussHermite,
) -> Outcome {
    let [mut m, mut q, mut s, mut p] = start;
    let one_t = 1.0 + t;
    let mut err = f64::INFINITY;
    for _ in 0..max_iter {
        let d = 1.0 + s;
        if d <= DOMAIN_FLOOR || !d.is_finite() {
            return Outcome::DomainExit(d);
        }
        let p_n = q * one_t * one_t / (d * d);
        let dl = 1.0 + alpha * t / d;
        let noise = (alpha * p_n).max(0.0).sqrt();
        let scale = beta / dl;
        let mut i1 = 0.0;
        let mut i2 = 0.0;
        for (&x, &w) in quad.nodes().iter().zip(quad.weights()) {
            let th = (scale * (m + noise * x)).tanh();
            i1 += w * th;
            i2 += w * (1.0 - th * th);
        }
        let m_n = one_t * i1 / (dl + t);
        let s_n = t / dl - beta * one_t * i2 / (dl * dl);
        let big_q_n = (1.0 - t * dl / (beta * one_t) + alpha * p_n * t * t / (one_t * one_t)
            - m_n * m_n * t * (t + 2.0 * dl) / (one_t * one_t)
            - 2.0 * alpha * beta * p_n * t * i2 / (one_t * dl))
            / (dl * dl);
        let q_n = big_q_n + s_n / (beta * one_t);
        err = (m_n - m)
            .abs()
            .max((q_n - q).abs())
            .max((s_n - s).abs())
            .max((p_n - p).abs() / (one_t * one_t));
        m += damping * (m_n - m);
        q += damping * (q_n - q);
        s += damping * (s_n - s);
        p += damping * (p_n - p);
        if err < tol {
            return Outcome::Converged([m, q, s, p]);
        }
    }
    Outcome::MaxIter(err)
}

/// One fixed-point solve with the domain-exit retry at doubled damping
/// strength (halved new-iterate weight).
fn attempt(
    alpha: f64,
    beta: f64,
    t: f64,
    start: State,
    cfg: &SolverConfig,
    quad: &GaussHermite,
) -> Result<State> {
    match iterate(alpha, beta, t, start, cfg.damping, cfg.tol, cfg.max_iter, quad) {
        Outcome::Converged(s) => Ok(s),
        Outcome::MaxIter(residual) => Err(Error::NonConvergence {
            iterations: cfg.max_iter,
            residual,
        }),
        Outcome::DomainExit(_) => match iterate(
            alpha,
            beta,
            t,
            start,
            0.5 * cfg.damping,
            cfg.tol,
            cfg.max_iter,
            quad,
        ) {
            Outcome::Converged(s) => Ok(s),
            Outcome::DomainExit(d) => Err(Error::DomainViolation {
                factor: "1 - beta(1+t)(Q - q)",
                value: d,
            }),
            Outcome::MaxIter(residual) => Err(Error::NonConvergence {
                iterations: cfg.max_iter,
                residual,
            }),
        },
    }
}

/// One fixed-point solve over a descending damping ladder. Stiff starts
/// (branch collapse, marches near criticality) often need a smaller
/// new-iterate weight than the configured default, so each failure retries
/// at a quarter of the previous weight down to 1e-3.
fn attempt_ladder(
    alpha: f64,
    beta: f64,
    t: f64,
    start: State,
    cfg: &SolverConfig,
    quad: &GaussHermite,
) -> Result<State> {
    let mut damping = cfg.damping.min(0.3);
    let mut domain_exit = None;
    let mut residual = f64::NAN;
    while damping >= 1e-3 {
        match iterate(alpha, beta, t, start, damping, cfg.tol, cfg.max_iter, quad) {
            Outcome::Converged(s) => return Ok(s),
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
            factor: "1 - beta(1+t)(Q - q)",
            value,
        }),
        None => Err(Error::NonConvergence {
            iterations: cfg.max_iter,
            residual,
        }),
    }
}

/// Cold start of the retrieval branch.
///
/// Phase 1 marches the sleep extent 0 -> t at a safe load
/// min(alpha, 0.02), warm-starting every leg; phase 2 marches the load up to
/// alpha at fixed (beta, t) with step halving. When the magnetized branch
/// dies before the target load, a final solve from the last good seed is
/// returned (it lands on the m = 0 state, which callers detect).
fn cold_retrieval(
    alpha: f64,
    beta: f64,
    t: f64,
    cfg: &SolverConfig,
    quad: &GaussHermite,
) -> Result<State> {
    let alpha_safe = alpha.min(0.02);
    let mut state = attempt(alpha_safe, beta, 0.0, [0.9, 0.9, 0.0, 0.9], cfg, quad)?;
    if t > 0.0 {
        let mut t_cur = 0.05f64.min(t);
        loop {
            state = attempt(alpha_safe, beta, t_cur, state, cfg, quad)?;
            if t_cur >= t {
                break;
            }
            t_cur = (t_cur * 1.6).min(t);
        }
    }
    if alpha > alpha_safe {
        let mut a_cur = alpha_safe;
        let mut step = 0.05;
        while step >= 1e-3 {
            let a_try = (a_cur + step).min(alpha);
            match attempt(a_try, beta, t, state, cfg, quad) {
                Ok(s) if s[0].abs() >= 0.05 => {
                    a_cur = a_try;
                    state = s;
                    if a_cur >= alpha {
                        return Ok(state);
                    }
                }
                _ => step *= 0.5,
            }
        }
        // The magnetized branch died below the target load; collapsing onto
        // the m = 0 state is stiff, so finish on the damping ladder.
        state = attempt_ladder(alpha, beta, t, state, cfg, quad)?;
    }
    Ok(state)
}

/// Cold start of the glassy branch.
///
/// Without dreaming the m = 0 fixed point closes into a single scalar
/// equation, so it is found directly by bisection; the four-variable
/// iteration near the glass onset is nearly singular there and marching
/// through it is both slow and fragile. With dreaming the branch is reached
/// by temperature continuation from the paramagnetic side with per-leg
/// adaptive damping and step halving.
fn cold_spin_glass(
    alpha: f64,
    beta: f64,
    t: f64,
    cfg: &SolverConfig,
    quad: &GaussHermite,
) -> Result<State> {
    if t == 0.0 {
        // At t = 0 the map fixes Q = 1, s = -beta (1 - q) and p = q / D^2,
        // leaving the classic scalar glass equation for q.
        let q = crate::meanfield::ags::sg_overlap(alpha, beta, quad);
        let s = -beta * (1.0 - q);
        let d = 1.0 + s;
        let p = if q == 0.0 { 0.0 } else { q / (d * d) };
        return Ok([0.0, q, s, p]);
    }
    let beta_start = if t > 2.0 {
        (0.5 / (1.0 + t)).min(0.5)
    } else {
        0.8
    }
    .min(beta);
    let seed = [0.0, 0.1, 0.0, 0.1 * (1.0 + t) * (1.0 + t)];
    let mut state = attempt_ladder(alpha, beta_start, t, seed, cfg, quad)?;
    let mut b = beta_start;
    let mut step = 0.12;
    while b < beta * (1.0 - 1e-12) {
        let b_try = (b * (1.0 + step)).min(beta);
        // Seed each leg with the overlap floored at a tiny positive value:
        // q = 0 stays a fixed point below the glass onset, but past it the
        // branch must be able to leave that unstable manifold (a damped
        // overshoot to q <= 0 would otherwise pin the march on the
        // paramagnet, because the noise scale is clamped at zero there).
        let mut start = state;
        start[1] = start[1].max(1e-6);
        let mut leg = None;
        let mut damping = cfg.damping.min(0.3);
        while damping >= 1e-3 {
            match iterate(alpha, b_try, t, start, damping, cfg.tol, cfg.max_iter, quad) {
                Outcome::Converged(s) => {
                    leg = Some(s);
                    break;
                }
                _ => damping /= 4.0,
            }
        }
        match leg {
            Some(s) => {
                b = b_try;
                state = s;
            }
            None => {
                step /= 2.0;
                if step < 1e-4 {
                    return Err(Error::NonConvergence {
                        iterations: cfg.max_iter,
                        residual: f64::NAN,
                    });
                }
            }
        }
    }
    Ok(state)
}

fn pack(state: State, alpha: f64, beta: f64, t: f64) -> OrderParams {
    let [m, q, s, p] = state;
    let d = 1.0 + s;
    OrderParams {
        m: m.abs(),
        q,
        big_q: q - s / (beta * (1.0 + t)),
        p,
        delta: 1.0 + alpha * t / d,
    }
}

fn check_inputs(alpha: f64, beta: f64, t: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("load must be >= 0, got {alpha}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeSleepExtent { t });
    }
    Ok(())
}

/// Solves the five self-consistency equations at (alpha, beta, t) on the
/// branch selected by `cfg.seed_branch`, cold-starting by continuation.
///
/// A "converged" result is not necessarily magnetized: when the retrieval
/// branch does not exist at the requested point the returned solution has
/// m ~ 0 (it collapsed onto the glassy state); callers probing for branch
/// existence test `m` against their jump threshold.
pub fn solve_finite_t(alpha: f64, beta: f64, t: f64, cfg: &SolverConfig) -> Result<OrderParams> {
    cfg.validate()?;
    check_inputs(alpha, beta, t)?;
    let quad = GaussHermite::new(cfg.quad_order)?;
    let state = match cfg.seed_branch {
        SeedBranch::Retrieval => cold_retrieval(alpha, beta, t, cfg, &quad)?,
        SeedBranch::SpinGlass => cold_spin_glass(alpha, beta, t, cfg, &quad)?,
    };
    Ok(pack(state, alpha, beta, t))
}

/// Warm solve from an explicit seed (used when tracing lines).
pub fn solve_finite_t_from(
    alpha: f64,
    beta: f64,
    t: f64,
    seed: &OrderParams,
    cfg: &SolverConfig,
) -> Result<OrderParams> {
    cfg.validate()?;
    check_inputs(alpha, beta, t)?;
    let quad = GaussHermite::new(cfg.quad_order)?;
    let s = beta * (1.0 + t) * (seed.q - seed.big_q);
    let state = attempt(alpha, beta, t, [seed.m, seed.q, s, seed.p], cfg, &quad)?;
    Ok(pack(state, alpha, beta, t))
}

/// Replica-symmetric free energy at the given order parameters.
///
/// Additive constants independent of the order parameters are dropped with
/// one fixed convention, so only differences between branches at identical
/// (alpha, beta, t) are meaningful. At zero load the expression collapses to
/// the Curie-Weiss form m^2/2 - log(2 cosh(beta m))/beta.
pub fn rs_free_energy(op: &OrderParams, alpha: f64, beta: f64, t: f64) -> Result<f64> {
    let quad = GaussHermite::new(120)?;
    rs_free_energy_with(op, alpha, beta, t, &quad)
}

/// [`rs_free_energy`] with a caller-owned quadrature rule.
pub(crate) fn rs_free_energy_with(
    op: &OrderParams,
    alpha: f64,
    beta: f64,
    t: f64,
    quad: &GaussHermite,
) -> Result<f64> {
    check_inputs(alpha, beta, t)?;
    let (m, q, big_q, p, dl) = (op.m, op.q, op.big_q, op.p, op.delta);
    let one_t = 1.0 + t;
    let d = 1.0 - beta * one_t * (big_q - q);
    if d <= 0.0 {
        return Err(Error::DomainViolation {
            factor: "1 - beta(1+t)(Q - q)",
            value: d,
        });
    }
    if dl <= 0.0 {
        return Err(Error::DomainViolation {
            factor: "Delta",
            value: dl,
        });
    }
    let ap = alpha * p;
    if ap < -1e-12 {
        return Err(Error::DomainViolation {
            factor: "alpha * p",
            value: ap,
        });
    }
    let noise = ap.max(0.0).sqrt();
    let lc = quad.integrate(|x| log_two_cosh((beta / dl) * (m + noise * x)))?;
    // The two terms singular in 1/t combine at t = 0 into the limit
    // alpha (Q - 1)/(2 D), with the conjugate diagonal eliminated through
    // its own stationarity condition.
    let bulk = if t == 0.0 {
        alpha * (big_q - 1.0) / (2.0 * d)
    } else {
        one_t * (dl - 1.0) * big_q / (2.0 * t) + one_t * (1.0 - dl) / (2.0 * t * dl)
    };
    Ok((m * m / (2.0 * one_t)) * (1.0 + t / dl)
        + bulk
        + 0.5 * alpha * beta * p * (big_q - q)
        + alpha / (2.0 * beta) * (d.ln() - q * beta * one_t / d)
        + dl.ln() / (2.0 * beta)
        + ap * t / (2.0 * one_t * dl)
        - lc / beta)
}

// ============================================================================
// Tests
// ============================================================================
