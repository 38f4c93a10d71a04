//! Phase-boundary extraction: retrieval spinodal (T_c), thermodynamic
//! retrieval boundary (T_R), point classification, and the two reduced
//! single-term models.
//!
//! The retrieval branch disappears discontinuously, so T_c is located by
//! warm-started continuation in temperature: anchor on the branch at low
//! temperature, then march upward with step halving until the magnetization
//! jump dies. T_R is where the retrieval branch stops being the global
//! free-energy minimum: the branch free energies cross, and the crossing is
//! bisected. Everything here builds on the cold-start solvers, so each grid
//! point is independent and line sweeps parallelize over the load grid.

use crate::error::{Error, Result};
use crate::meanfield::finite_t::{
    rs_free_energy, solve_finite_t, solve_finite_t_from, OrderParams,
};
use crate::meanfield::{SeedBranch, SolverConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

/// Retrieval declared dead when the converged magnetization falls below this
/// jump threshold (the transition is first order: the live branch sits far
/// above, numerical dust far below).
const JUMP_THRESHOLD: f64 = 0.05;
/// Temperature resolution of the spinodal march.
const TC_REFINE: f64 = 1e-4;
/// Temperature resolution of the free-energy-crossing bisection.
const TR_REFINE: f64 = 1e-3;
/// Below this glassy overlap the m = 0 state counts as paramagnetic.
const SG_ONSET: f64 = 1e-3;
/// Coarse scan step when walking lines in temperature.
const SCAN_STEP: f64 = 0.05;

/// Thermodynamic classification of one (alpha, T, t) point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTag {
    /// Ergodic: no glassy order, no retrieval.
    Paramagnetic,
    /// Glassy order but the retrieval branch does not exist.
    SpinGlass,
    /// Retrieval states exist but only as local free-energy minima.
    MixedRetrieval,
    /// Retrieval states are the global free-energy minima.
    PureRetrieval,
}

impl fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseTag::Paramagnetic => "paramagnetic",
            PhaseTag::SpinGlass => "spin_glass",
            PhaseTag::MixedRetrieval => "mixed_retrieval",
            PhaseTag::PureRetrieval => "pure_retrieval",
        };
        f.write_str(s)
    }
}

/// One classified point of the phase diagram with the branch free energies
/// that were available there.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub temperature: f64,
    pub t: f64,
    pub tag: PhaseTag,
    /// Retrieval free energy; absent when the branch does not exist.
    pub a_retrieval: Option<f64>,
    /// Glassy-branch free energy (paramagnetic value when q ~ 0).
    pub a_spin_glass: Option<f64>,
}

fn check_point(alpha: f64, t: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidConfig(format!("load must be >= 0, got {alpha}")));
    }
    if !(t >= 0.0) {
        return Err(Error::NegativeSleepExtent { t });
    }
    Ok(())
}

fn check_grid(alpha_grid: &[f64]) -> Result<()> {
    for pair in alpha_grid.windows(2) {
        if !(pair[1] >= pair[0]) {
            return Err(Error::InvalidConfig(format!(
                "load grid must be sorted ascending, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    for &alpha in alpha_grid {
        check_point(alpha, 0.0)?;
    }
    Ok(())
}

fn alive(sol: &OrderParams) -> bool {
    sol.m >= JUMP_THRESHOLD
}

/// Critical temperature of retrieval at (alpha, t): the highest temperature
/// at which the magnetized branch still exists, to a resolution of 1e-4.
///
/// Returns `Ok(None)` when the branch exists at no temperature (the load
/// exceeds the zero-temperature capacity).
pub fn find_tc(alpha: f64, t: f64, cfg: &SolverConfig) -> Result<Option<f64>> {
    cfg.validate()?;
    check_point(alpha, t)?;
    let retrieval_cfg = cfg.with_branch(SeedBranch::Retrieval);
    // Anchor on the branch somewhere below the transition. The descent is
    // floored at T = 0.05: colder than that the smooth quadrature saturates
    // into a step function and fabricates magnetized fixed points beyond the
    // true capacity (the zero-temperature limit has its own solver).
    let mut temp = 0.3;
    let mut anchor = None;
    while temp >= 0.05 {
        match solve_finite_t(alpha, 1.0 / temp, t, &retrieval_cfg) {
            Ok(sol) if alive(&sol) => {
                anchor = Some((temp, sol));
                break;
            }
            _ => temp *= 0.5,
        }
    }
    let Some((mut temp, mut state)) = anchor else {
        return Ok(None);
    };
    // Warm-started upward march tracks the branch to the spinodal.
    let mut step = SCAN_STEP;
    while step >= TC_REFINE {
        let t_try = temp + step;
        match solve_finite_t_from(alpha, 1.0 / t_try, t, &state, cfg) {
            Ok(sol) if alive(&sol) => {
                temp = t_try;
                state = sol;
            }
            _ => step *= 0.5,
        }
    }
    Ok(Some(temp))
}

/// Retrieval spinodal over a sorted load grid. Points where the branch never
/// exists (or the solver fails) are flagged as `None`.
pub fn tc_line(t: f64, alpha_grid: &[f64], cfg: &SolverConfig) -> Result<Vec<(f64, Option<f64>)>> {
    cfg.validate()?;
    check_point(0.0, t)?;
    check_grid(alpha_grid)?;
    Ok(alpha_grid
        .par_iter()
        .map(|&alpha| (alpha, find_tc(alpha, t, cfg).ok().flatten()))
        .collect())
}

/// Free-energy difference retrieval - glassy at one temperature; `None` when
/// either branch is unavailable there.
fn branch_gap(alpha: f64, temp: f64, t: f64, cfg: &SolverConfig) -> Option<f64> {
    let beta = 1.0 / temp;
    let ret = solve_finite_t(alpha, beta, t, &cfg.with_branch(SeedBranch::Retrieval)).ok()?;
    if !alive(&ret) {
        return None;
    }
    let sg = solve_finite_t(alpha, beta, t, &cfg.with_branch(SeedBranch::SpinGlass)).ok()?;
    let a_ret = rs_free_energy(&ret, alpha, beta, t).ok()?;
    let a_sg = rs_free_energy(&sg, alpha, beta, t).ok()?;
    Some(a_ret - a_sg)
}

fn find_tr(alpha: f64, t: f64, cfg: &SolverConfig) -> Option<f64> {
    let tc = find_tc(alpha, t, cfg).ok().flatten()?;
    let gap_tc = branch_gap(alpha, tc, t, cfg)?;
    if gap_tc <= 0.0 {
        // Retrieval is global all the way to the spinodal: the crossing
        // coincides with it.
        return Some(tc);
    }
    // Scan downward for a sign change, then bisect. The scan is floored at
    // T = 0.1: colder than that the glassy integrands steepen past the node
    // resolution of the smooth quadrature and the replica-symmetric glassy
    // free energy itself loses reliability (its entropy turns negative), so
    // only a crossing inside the trustworthy window is reported.
    let mut t_hi = tc;
    let mut bracket = None;
    let mut temp = tc - SCAN_STEP;
    while temp > 0.1 {
        if let Some(gap) = branch_gap(alpha, temp, t, cfg) {
            if gap <= 0.0 {
                bracket = Some((temp, t_hi));
                break;
            }
            t_hi = temp;
        }
        temp -= SCAN_STEP;
    }
    let (mut lo, mut hi) = bracket?;
    while hi - lo > TR_REFINE {
        let mid = 0.5 * (lo + hi);
        match branch_gap(alpha, mid, t, cfg) {
            Some(gap) if gap <= 0.0 => lo = mid,
            Some(_) => hi = mid,
            None => break,
        }
    }
    Some(0.5 * (lo + hi))
}

/// Thermodynamic retrieval boundary over a sorted load grid: for each load,
/// the temperature where the retrieval free energy crosses the glassy one,
/// bisected to 1e-3. Loads whose retrieval branch never becomes the global
/// minimum are flagged as `None`.
pub fn tr_line(t: f64, alpha_grid: &[f64], cfg: &SolverConfig) -> Result<Vec<(f64, Option<f64>)>> {
    cfg.validate()?;
    check_point(0.0, t)?;
    check_grid(alpha_grid)?;
    Ok(alpha_grid
        .par_iter()
        .map(|&alpha| (alpha, find_tr(alpha, t, cfg)))
        .collect())
}

/// Classifies one (alpha, T, t) point by solving both branches and comparing
/// free energies.
pub fn classify_phase(alpha: f64, temperature: f64, t: f64, cfg: &SolverConfig) -> Result<PhasePoint> {
    cfg.validate()?;
    check_point(alpha, t)?;
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    let beta = 1.0 / temperature;
    let sg = solve_finite_t(alpha, beta, t, &cfg.with_branch(SeedBranch::SpinGlass))?;
    let a_sg = rs_free_energy(&sg, alpha, beta, t)?;
    let retrieval = solve_finite_t(alpha, beta, t, &cfg.with_branch(SeedBranch::Retrieval))
        .ok()
        .filter(alive);
    let (tag, a_retrieval) = match retrieval {
        Some(ret) => {
            let a_ret = rs_free_energy(&ret, alpha, beta, t)?;
            let tag = if a_ret <= a_sg {
                PhaseTag::PureRetrieval
            } else {
                PhaseTag::MixedRetrieval
            };
            (tag, Some(a_ret))
        }
        None => {
            let tag = if sg.q < SG_ONSET {
                PhaseTag::Paramagnetic
            } else {
                PhaseTag::SpinGlass
            };
            (tag, None)
        }
    };
    Ok(PhasePoint {
        alpha,
        temperature,
        t,
        tag,
        a_retrieval,
        a_spin_glass: Some(a_sg),
    })
}

/// Zero-load critical temperatures of the two single-term reduced dynamics:
/// reinforcement alone heats the transition to 1 + t, removal alone cools it
/// to 1/(1 + t); their product is always 1.
pub fn reduced_models_tc(t: f64) -> (f64, f64) {
    assert!(t >= 0.0, "sleep extent must be >= 0, got {t}");
    (1.0 + t, 1.0 / (1.0 + t))
}

// ============================================================================
// Tests
// ============================================================================
