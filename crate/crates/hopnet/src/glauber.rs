//! Monte Carlo dynamics of the network and the simulation experiments built
//! on them.
//!
//! Two families of dynamics are provided. At finite temperature, sequential
//! heat-bath updates set each spin to `+1` with probability
//! `(1 + tanh(beta h_i)) / 2`, where `h_i` is the local field without the
//! self-coupling; this chain satisfies detailed balance with respect to the
//! Boltzmann weight of the pairwise energy. At zero temperature the dynamics
//! become deterministic: sequential single-spin descent (which never
//! increases the energy, and therefore always terminates in a fixed point)
//! or synchronous sign updates (which may enter a period-2 orbit; the orbit
//! is detected and reported rather than raised).
//!
//! The experiment drivers — retrieval curves over a temperature grid,
//! internal-field statistics at zero-temperature fixed points, and
//! attraction-basin maps under initial corruption — run realizations in
//! parallel, each on its own deterministically derived random stream, so a
//! fixed master seed reproduces results bitwise.
//!
//! Large runs avoid the dense coupling matrix entirely: a pattern-space
//! engine caches `a_i = K xi_i` and maintains the overlap vector, making a
//! single spin update O(P) instead of O(N).

use crate::error::{Error, Result};
use crate::kernel::{dream_kernel, CouplingMatrix, NetworkState};
use crate::patterns::{correlation_matrix, generate_patterns, PatternSet};
use crate::rng::{self, Purpose};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

// ============================================================================
// Configuration and record types
// ============================================================================

/// Spin-update scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateMode {
    /// One spin at a time, in site order. The only mode allowed at finite
    /// temperature, and the zero-temperature default (energy descent
    /// guarantees a fixed point).
    Sequential,
    /// All spins at once from the same field snapshot. Zero temperature
    /// only; may enter a period-2 orbit, which is detected.
    Parallel,
}

/// Parameters of a Monte Carlo experiment.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McConfig {
    /// Inverse temperature for finite-temperature runs (ignored when
    /// `zero_t` is set).
    pub beta: f64,
    /// Run the deterministic zero-temperature dynamics instead of heat-bath
    /// sampling.
    pub zero_t: bool,
    /// Sweeps discarded before measuring (doubled, up to a cap, until the
    /// windowed means of the tracked overlap stabilize).
    pub burn_in_sweeps: usize,
    /// Sweeps over which thermal averages are taken.
    pub measure_sweeps: usize,
    /// Independent pattern realizations averaged over.
    pub realizations: usize,
    /// Master seed; every pattern draw, initial state, and thermal stream
    /// is derived from it.
    pub seed: u64,
    /// Spin-update scheduling.
    pub update_mode: UpdateMode,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            beta: 2.0,
            zero_t: false,
            burn_in_sweeps: 1000,
            measure_sweeps: 1000,
            realizations: 20,
            seed: 42,
            update_mode: UpdateMode::Sequential,
        }
    }
}

impl McConfig {
    /// Checks the invariants: positive sweep/realization counts, a usable
    /// inverse temperature for finite-temperature runs, and parallel
    /// scheduling restricted to zero temperature.
    pub fn validate(&self) -> Result<()> {
        if self.burn_in_sweeps == 0 || self.measure_sweeps == 0 || self.realizations == 0 {
            return Err(Error::InvalidConfig(
                "sweep and realization counts must be >= 1".into(),
            ));
        }
        if !self.zero_t && !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "inverse temperature must be finite and >= 0, got {}",
                self.beta
            )));
        }
        if self.update_mode == UpdateMode::Parallel && !self.zero_t {
            return Err(Error::InvalidConfig(
                "parallel updates are only defined at zero temperature".into(),
            ));
        }
        Ok(())
    }
}

/// One measured observable with its experimental context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    /// Number of spins.
    pub n: usize,
    /// Number of stored patterns.
    pub p: usize,
    /// Load P/N (exact ratio).
    pub alpha: f64,
    /// Temperature of the run (0 for zero-temperature dynamics).
    pub temperature: f64,
    /// Sleep extent of the coupling matrix.
    pub t: f64,
    /// Master seed the run was derived from.
    pub seed: u64,
    /// Name of the measured observable.
    pub observable: String,
    /// Mean over realizations.
    pub value: f64,
    /// Standard error over realizations (sample std / sqrt(M)).
    pub std_error: f64,
}

/// Outcome of a zero-temperature relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    /// Every spin is aligned with its field.
    FixedPoint {
        /// Sweeps (sequential) or steps (parallel) used.
        steps: usize,
    },
    /// Synchronous updates entered a period-2 orbit.
    TwoCycle {
        /// Steps taken before the orbit was recognized.
        steps: usize,
    },
    /// The step budget ran out first.
    Unsettled {
        /// The exhausted budget.
        steps: usize,
    },
}

/// Zero-temperature field statistics at retrieval fixed points.
#[derive(Debug, Clone, Serialize)]
pub struct FieldStatistics {
    /// Sleep extent of the couplings.
    pub t: f64,
    /// Mean of the spin-aligned fields h_i sigma_i.
    pub mean: f64,
    /// Sample standard deviation of the spin-aligned fields.
    pub std: f64,
    /// Histogram bin centers.
    pub bin_centers: Vec<f64>,
    /// Histogram densities (normalized to unit area).
    pub densities: Vec<f64>,
    /// Number of field samples collected.
    pub samples: usize,
    /// Runs discarded because the fixed point did not retrieve (or a
    /// parallel orbit never settled). Counted, never silently dropped.
    pub discarded_runs: usize,
    /// Total relaxation runs attempted.
    pub total_runs: usize,
}

// ============================================================================
// Dense-coupling dynamics (reference path)
// ============================================================================

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "inverse temperature must be finite and >= 0, got {beta}"
        )));
    }
    Ok(())
}

/// Local field at site `i` without the self-coupling.
fn field_without_self(m: &DMatrix<f64>, spins: &[i8], i: usize) -> f64 {
    let mut h = 0.0;
    for (k, &s) in spins.iter().enumerate() {
        h += m[(i, k)] * s as f64;
    }
    h - m[(i, i)] * spins[i] as f64
}

fn heat_bath_sweep_in_place(m: &DMatrix<f64>, spins: &mut [i8], beta: f64, rng: &mut impl Rng) {
    for i in 0..spins.len() {
        let h = field_without_self(m, spins, i);
        let p_up = 0.5 * (1.0 + (beta * h).tanh());
        // Always one draw per spin, so trajectories are reproducible
        // independent of the outcome sequence.
        let u: f64 = rng.random();
        spins[i] = if u < p_up { 1 } else { -1 };
    }
}

/// One sequential heat-bath sweep: sites `0..N` in order, each spin set to
/// `+1` with probability `(1 + tanh(beta h_i)) / 2` at its current field
/// (self-coupling excluded). Satisfies detailed balance for the pairwise
/// energy; at `beta = 0` every spin is an unbiased coin flip.
pub fn glauber_sweep(
    j: &CouplingMatrix,
    s: &NetworkState,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<NetworkState> {
    check_beta(beta)?;
    require_len(j.n(), s)?;
    let mut out = s.clone();
    heat_bath_sweep_in_place(j.matrix(), out.spins_mut(), beta, rng);
    Ok(out)
}

fn zero_t_sweep_in_place(m: &DMatrix<f64>, spins: &mut [i8]) -> usize {
    let mut flips = 0;
    for i in 0..spins.len() {
        let h = field_without_self(m, spins, i);
        // Strictly opposing fields flip the spin; a zero field keeps it.
        if (spins[i] as f64) * h < 0.0 {
            spins[i] = -spins[i];
            flips += 1;
        }
    }
    flips
}

/// One synchronous zero-temperature step: every spin is set to the sign of
/// its current field simultaneously; zero fields keep the previous spin.
pub fn zero_t_parallel_step(j: &CouplingMatrix, s: &NetworkState) -> Result<NetworkState> {
    require_len(j.n(), s)?;
    let m = j.matrix();
    let spins = s.spins();
    let next: Vec<i8> = (0..spins.len())
        .map(|i| {
            let h = field_without_self(m, spins, i);
            if h > 0.0 {
                1
            } else if h < 0.0 {
                -1
            } else {
                spins[i]
            }
        })
        .collect();
    NetworkState::new(next)
}

/// Runs the zero-temperature dynamics to termination.
///
/// Sequential mode performs energy-descent sweeps and stops at the first
/// sweep with no flips; parallel mode iterates synchronous steps and stops
/// on a fixed point or on a period-2 orbit, which is reported as
/// [`Relaxation::TwoCycle`] together with one of its two states.
pub fn relax_zero_t(
    j: &CouplingMatrix,
    s: &NetworkState,
    mode: UpdateMode,
    max_steps: usize,
) -> Result<(NetworkState, Relaxation)> {
    require_len(j.n(), s)?;
    let m = j.matrix();
    match mode {
        UpdateMode::Sequential => {
            let mut state = s.clone();
            for sweep in 1..=max_steps {
                if zero_t_sweep_in_place(m, state.spins_mut()) == 0 {
                    return Ok((state, Relaxation::FixedPoint { steps: sweep }));
                }
            }
            Ok((state, Relaxation::Unsettled { steps: max_steps }))
        }
        UpdateMode::Parallel => {
            let mut previous = s.clone();
            let mut current = zero_t_parallel_step(j, &previous)?;
            if current.spins() == previous.spins() {
                return Ok((current, Relaxation::FixedPoint { steps: 1 }));
            }
            for step in 2..=max_steps {
                let next = zero_t_parallel_step(j, &current)?;
                if next.spins() == current.spins() {
                    return Ok((next, Relaxation::FixedPoint { steps: step }));
                }
                if next.spins() == previous.spins() {
                    return Ok((next, Relaxation::TwoCycle { steps: step }));
                }
                previous = current;
                current = next;
            }
            Ok((current, Relaxation::Unsettled { steps: max_steps }))
        }
    }
}

fn require_len(n: usize, s: &NetworkState) -> Result<()> {
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.len(),
        });
    }
    Ok(())
}

// ============================================================================
// Pattern-space engine: O(P) per spin update
// ============================================================================

/// Monte Carlo engine that works in pattern space.
///
/// Caches `a_i = K xi_i` (one length-P vector per site, stored column-wise)
/// and maintains the overlap vector `m`, so a local field is
/// `h_i = a_i . m - J_ii sigma_i` at O(P) cost and a flip updates `m` in
/// O(P). The energy is `-(N m^T K m - sum_i J_ii) / 2`, identical to the
/// dense pairwise energy without self-coupling.
pub struct PatternEngine {
    /// P x N matrix whose column i is K xi_i.
    a: DMatrix<f64>,
    /// The P x P kernel (kept for the energy quadratic form).
    k: DMatrix<f64>,
    /// Pattern entries, row-major per pattern (P x N as i8).
    xi: Vec<i8>,
    /// Self-couplings J_ii.
    diag: Vec<f64>,
    /// Current overlap vector m_mu = (1/N) sum_i xi_i^mu sigma_i.
    m: Vec<f64>,
    /// Current spins.
    spins: Vec<i8>,
    n: usize,
    p: usize,
}

impl PatternEngine {
    /// Builds the engine for the dreamed couplings at sleep extent `t`
    /// (`t = 0` is the plain Hebbian matrix), starting from `initial`.
    pub fn new(ps: &PatternSet, t: f64, initial: &NetworkState) -> Result<Self> {
        if initial.len() != ps.n() {
            return Err(Error::DimensionMismatch {
                expected: ps.n(),
                got: initial.len(),
            });
        }
        let c = correlation_matrix(ps);
        let k = dream_kernel(&c, t)?;
        let (n, p) = (ps.n(), ps.p());
        let xi_mat = DMatrix::from_fn(p, n, |mu, i| ps.entry(mu, i) as f64);
        let a = &k * &xi_mat;
        let mut diag = vec![0.0; n];
        for i in 0..n {
            let mut d = 0.0;
            for mu in 0..p {
                d += a[(mu, i)] * xi_mat[(mu, i)];
            }
            diag[i] = d / n as f64;
        }
        let mut xi = vec![0i8; p * n];
        for mu in 0..p {
            xi[mu * n..(mu + 1) * n].copy_from_slice(ps.pattern(mu));
        }
        let mut engine = PatternEngine {
            a,
            k,
            xi,
            diag,
            m: vec![0.0; p],
            spins: initial.spins().to_vec(),
            n,
            p,
        };
        engine.rebuild_overlaps();
        Ok(engine)
    }

    /// Replaces the state and recomputes the overlap vector exactly.
    pub fn set_state(&mut self, s: &NetworkState) -> Result<()> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        self.spins.copy_from_slice(s.spins());
        self.rebuild_overlaps();
        Ok(())
    }

    fn rebuild_overlaps(&mut self) {
        for mu in 0..self.p {
            let row = &self.xi[mu * self.n..(mu + 1) * self.n];
            let mut acc: i64 = 0;
            for (x, s) in row.iter().zip(&self.spins) {
                acc += (x * s) as i64;
            }
            self.m[mu] = acc as f64 / self.n as f64;
        }
    }

    /// Current state as an owned [`NetworkState`].
    pub fn state(&self) -> NetworkState {
        NetworkState::new(self.spins.clone()).expect("engine spins are valid")
    }

    /// Overlap with the first pattern.
    pub fn m1(&self) -> f64 {
        self.m[0]
    }

    /// All Mattis overlaps.
    pub fn overlaps(&self) -> &[f64] {
        &self.m
    }

    /// Local field at site `i`, self-coupling excluded.
    fn field(&self, i: usize) -> f64 {
        let mut h = 0.0;
        let col = self.a.column(i);
        for (a_mu, m_mu) in col.iter().zip(&self.m) {
            h += a_mu * m_mu;
        }
        h - self.diag[i] * self.spins[i] as f64
    }

    /// Full local field at site `i` (self-coupling included), as reported by
    /// the dense matrix-vector product.
    pub fn full_field(&self, i: usize) -> f64 {
        let mut h = 0.0;
        let col = self.a.column(i);
        for (a_mu, m_mu) in col.iter().zip(&self.m) {
            h += a_mu * m_mu;
        }
        h
    }

    fn set_spin(&mut self, i: usize, value: i8) {
        if self.spins[i] == value {
            return;
        }
        self.spins[i] = value;
        let scale = 2.0 * value as f64 / self.n as f64;
        let row_base = i;
        for mu in 0..self.p {
            self.m[mu] += scale * self.xi[mu * self.n + row_base] as f64;
        }
    }

    /// One sequential heat-bath sweep (same update law and draw discipline
    /// as the dense path).
    pub fn sweep_finite_t(&mut self, beta: f64, rng: &mut impl Rng) {
        for i in 0..self.n {
            let h = self.field(i);
            let p_up = 0.5 * (1.0 + (beta * h).tanh());
            let u: f64 = rng.random();
            let next = if u < p_up { 1 } else { -1 };
            self.set_spin(i, next);
        }
    }

    /// One sequential zero-temperature sweep; returns the number of flips.
    pub fn sweep_zero_t(&mut self) -> usize {
        let mut flips = 0;
        for i in 0..self.n {
            let h = self.field(i);
            if (self.spins[i] as f64) * h < 0.0 {
                let next = -self.spins[i];
                self.set_spin(i, next);
                flips += 1;
            }
        }
        flips
    }

    /// One synchronous zero-temperature step; returns whether anything moved.
    pub fn parallel_step(&mut self) -> bool {
        let mut next = self.spins.clone();
        let mut changed = false;
        for i in 0..self.n {
            let h = self.field(i);
            // Same tie rule as the dense path: zero field keeps the spin.
            let s = if h > 0.0 {
                1
            } else if h < 0.0 {
                -1
            } else {
                self.spins[i]
            };
            if s != self.spins[i] {
                changed = true;
            }
            next[i] = s;
        }
        if changed {
            for i in 0..self.n {
                if next[i] != self.spins[i] {
                    let v = next[i];
                    self.set_spin(i, v);
                }
            }
        }
        changed
    }

    /// Runs the zero-temperature dynamics to termination (same contract as
    /// [`relax_zero_t`], on the engine).
    pub fn relax(&mut self, mode: UpdateMode, max_steps: usize) -> Relaxation {
        match mode {
            UpdateMode::Sequential => {
                for sweep in 1..=max_steps {
                    if self.sweep_zero_t() == 0 {
                        return Relaxation::FixedPoint { steps: sweep };
                    }
                }
                Relaxation::Unsettled { steps: max_steps }
            }
            UpdateMode::Parallel => {
                let mut previous = self.spins.clone();
                for step in 1..=max_steps {
                    let before = self.spins.clone();
                    if !self.parallel_step() {
                        return Relaxation::FixedPoint { steps: step };
                    }
                    if self.spins == previous {
                        return Relaxation::TwoCycle { steps: step };
                    }
                    previous = before;
                }
                Relaxation::Unsettled { steps: max_steps }
            }
        }
    }

    /// Pairwise energy without self-couplings,
    /// `-(N m^T K m - sum_i J_ii) / 2`.
    pub fn energy(&self) -> f64 {
        let mut quad = 0.0;
        for mu in 0..self.p {
            let mut row = 0.0;
            for nu in 0..self.p {
                row += self.k[(mu, nu)] * self.m[nu];
            }
            quad += self.m[mu] * row;
        }
        let trace: f64 = self.diag.iter().sum();
        -0.5 * (self.n as f64 * quad - trace)
    }
}

// ============================================================================
// Experiment drivers
// ============================================================================

const WINDOW_SWEEPS: usize = 500;
const MAX_BURN_DOUBLINGS: usize = 4;
const RELAX_CAP: usize = 10_000;

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean and standard error (sample std over sqrt(M)) of realization values.
fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = mean(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    (m, (var / values.len() as f64).sqrt())
}

fn check_dims(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidDimension {
            what: "experiment",
            details: format!("need n >= 1 and p >= 1, got n = {n}, p = {p}"),
        });
    }
    Ok(())
}

fn check_sleep(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NegativeSleepExtent { t });
    }
    Ok(())
}

/// Burns in, then keeps sampling until two consecutive 500-sweep windows of
/// the tracked overlap agree within 0.01, doubling the extra burn-in up to a
/// cap before giving up and proceeding.
fn equilibrate(engine: &mut PatternEngine, beta: f64, burn_in: usize, rng: &mut impl Rng) {
    fn window(engine: &mut PatternEngine, beta: f64, rng: &mut impl Rng) -> f64 {
        let mut acc = 0.0;
        for _ in 0..WINDOW_SWEEPS {
            engine.sweep_finite_t(beta, rng);
            acc += engine.m1();
        }
        acc / WINDOW_SWEEPS as f64
    }
    for _ in 0..burn_in {
        engine.sweep_finite_t(beta, rng);
    }
    let mut extra = burn_in;
    for _ in 0..=MAX_BURN_DOUBLINGS {
        let a = window(engine, beta, rng);
        let b = window(engine, beta, rng);
        if (a - b).abs() < 0.01 {
            return;
        }
        for _ in 0..extra {
            engine.sweep_finite_t(beta, rng);
        }
        extra *= 2;
    }
}

/// Thermal retrieval curve: for each temperature, the thermal average of the
/// first-pattern overlap from a pattern start, averaged over pattern
/// realizations.
///
/// Each realization draws fresh patterns, starts at the first pattern, burns
/// in with the windowed-stability criterion, and averages `m1` over the
/// configured measurement sweeps. Realizations run in parallel on derived
/// streams; a fixed config reproduces records bitwise.
pub fn retrieval_curve(
    n: usize,
    p: usize,
    t: f64,
    temperatures: &[f64],
    cfg: &McConfig,
) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    check_dims(n, p)?;
    check_sleep(t)?;
    if cfg.zero_t {
        return Err(Error::InvalidConfig(
            "retrieval curves sample at finite temperature; unset zero_t".into(),
        ));
    }
    for &temp in temperatures {
        if !(temp > 0.0 && temp.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "temperatures must be positive and finite, got {temp}"
            )));
        }
    }
    let mut records = Vec::with_capacity(temperatures.len());
    for (t_idx, &temp) in temperatures.iter().enumerate() {
        let beta = 1.0 / temp;
        let values: Result<Vec<f64>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| {
                let ps = generate_patterns(
                    n,
                    p,
                    rng::derive_seed(cfg.seed, Purpose::Patterns, r as u64),
                )?;
                let start = NetworkState::from_pattern(&ps, 0);
                let mut engine = PatternEngine::new(&ps, t, &start)?;
                let mut thermal = rng::stream(
                    cfg.seed,
                    Purpose::Thermal,
                    ((t_idx as u64) << 32) | r as u64,
                );
                equilibrate(&mut engine, beta, cfg.burn_in_sweeps, &mut thermal);
                let mut acc = 0.0;
                for _ in 0..cfg.measure_sweeps {
                    engine.sweep_finite_t(beta, &mut thermal);
                    acc += engine.m1();
                }
                Ok(acc / cfg.measure_sweeps as f64)
            })
            .collect();
        let values = values?;
        debug_assert!(values.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        let (value, std_error) = mean_and_stderr(&values);
        records.push(ExperimentRecord {
            n,
            p,
            alpha: p as f64 / n as f64,
            temperature: temp,
            t,
            seed: cfg.seed,
            observable: "m1".into(),
            value,
            std_error,
        });
    }
    Ok(records)
}

fn random_state(n: usize, rng: &mut impl Rng) -> NetworkState {
    let spins: Vec<i8> = (0..n)
        .map(|_| if rng.random::<f64>() < 0.5 { 1 } else { -1 })
        .collect();
    NetworkState::new(spins).expect("generated spins are valid")
}

/// Zero-temperature internal-field statistics at retrieval fixed points.
///
/// Relaxes random initial states to fixed points; runs whose final state is
/// not a retrieval state (no overlap of magnitude at least 0.8), or whose
/// parallel dynamics never settle, are discarded and counted. At accepted
/// fixed points the spin-aligned full fields `h_i sigma_i` are collected,
/// histogrammed, and summarized by their mean and sample standard deviation.
pub fn field_statistics(n: usize, p: usize, t: f64, cfg: &McConfig) -> Result<FieldStatistics> {
    cfg.validate()?;
    check_dims(n, p)?;
    check_sleep(t)?;
    if !cfg.zero_t {
        return Err(Error::InvalidConfig(
            "field statistics are defined at zero temperature; set zero_t".into(),
        ));
    }
    let runs: Result<Vec<Option<Vec<f64>>>> = (0..cfg.realizations)
        .into_par_iter()
        .map(|r| {
            let ps = generate_patterns(
                n,
                p,
                rng::derive_seed(cfg.seed, Purpose::Patterns, r as u64),
            )?;
            let mut init_rng = rng::stream(cfg.seed, Purpose::InitialState, r as u64);
            let start = random_state(n, &mut init_rng);
            let mut engine = PatternEngine::new(&ps, t, &start)?;
            let outcome = engine.relax(cfg.update_mode, RELAX_CAP);
            if !matches!(outcome, Relaxation::FixedPoint { .. }) {
                return Ok(None);
            }
            let retrieves = engine.overlaps().iter().any(|m| m.abs() >= 0.8);
            if !retrieves {
                return Ok(None);
            }
            let spins = engine.state();
            let fields: Vec<f64> = (0..n)
                .map(|i| engine.full_field(i) * spins.spins()[i] as f64)
                .collect();
            Ok(Some(fields))
        })
        .collect();
    let runs = runs?;
    let total_runs = runs.len();
    let mut samples = Vec::new();
    let mut discarded = 0usize;
    for run in runs {
        match run {
            Some(mut fields) => samples.append(&mut fields),
            None => discarded += 1,
        }
    }
    if samples.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "no retrieval fixed points found in {total_runs} runs; \
             cannot collect field statistics"
        )));
    }
    let (mean_h, std_h) = {
        let m = mean(&samples);
        let var = samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / (samples.len().max(2) - 1) as f64;
        (m, var.sqrt())
    };
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = (hi - lo).max(1e-9);
    let bins = 60usize;
    let width = span / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &samples {
        let idx = (((v - lo) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let bin_centers: Vec<f64> = (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let densities: Vec<f64> = counts
        .iter()
        .map(|&c| c as f64 / (samples.len() as f64 * width))
        .collect();
    Ok(FieldStatistics {
        t,
        mean: mean_h,
        std: std_h,
        bin_centers,
        densities,
        samples: samples.len(),
        discarded_runs: discarded,
        total_runs,
    })
}

/// Attraction-basin experiment: retrieval frequency as a function of the
/// initial corruption.
///
/// For each flip probability, every realization draws fresh patterns and
/// runs several stochastic corruptions of the first pattern (each spin
/// flipped independently), relaxes them at zero temperature, and counts
/// success when the first-pattern overlap is the maximal Mattis overlap in
/// magnitude. The frequency is reported with its binomial standard error.
pub fn basin_experiment(
    n: usize,
    p: usize,
    t: f64,
    flip_probs: &[f64],
    evolutions: usize,
    cfg: &McConfig,
) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    check_dims(n, p)?;
    check_sleep(t)?;
    if !cfg.zero_t {
        return Err(Error::InvalidConfig(
            "basin experiments relax at zero temperature; set zero_t".into(),
        ));
    }
    if evolutions == 0 {
        return Err(Error::InvalidConfig(
            "need at least one stochastic evolution per realization".into(),
        ));
    }
    for &p_flip in flip_probs {
        if !(0.0..=1.0).contains(&p_flip) {
            return Err(Error::InvalidConfig(format!(
                "flip probabilities must lie in [0, 1], got {p_flip}"
            )));
        }
    }
    let mut records = Vec::with_capacity(flip_probs.len());
    for (p_idx, &p_flip) in flip_probs.iter().enumerate() {
        let successes: Result<Vec<usize>> = (0..cfg.realizations)
            .into_par_iter()
            .map(|r| {
                let ps = generate_patterns(
                    n,
                    p,
                    rng::derive_seed(cfg.seed, Purpose::Patterns, r as u64),
                )?;
                let clean = NetworkState::from_pattern(&ps, 0);
                let mut engine = PatternEngine::new(&ps, t, &clean)?;
                let mut wins = 0usize;
                for e in 0..evolutions {
                    let stream_index = ((p_idx as u64) << 42)
                        | ((r as u64) << 21)
                        | e as u64;
                    let mut corrupt_rng =
                        rng::stream(cfg.seed, Purpose::Corruption, stream_index);
                    let mut corrupted = clean.clone();
                    for i in 0..n {
                        if corrupt_rng.random::<f64>() < p_flip {
                            corrupted.flip(i);
                        }
                    }
                    engine.set_state(&corrupted)?;
                    let outcome = engine.relax(cfg.update_mode, RELAX_CAP);
                    if !matches!(outcome, Relaxation::FixedPoint { .. }) {
                        continue;
                    }
                    let m = engine.overlaps();
                    let best = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                    if m[0] >= best * (1.0 - 1e-12) {
                        wins += 1;
                    }
                }
                Ok(wins)
            })
            .collect();
        let successes = successes?;
        let trials = (cfg.realizations * evolutions) as f64;
        let freq = successes.iter().sum::<usize>() as f64 / trials;
        let std_error = (freq * (1.0 - freq) / trials).sqrt();
        records.push(ExperimentRecord {
            n,
            p,
            alpha: p as f64 / n as f64,
            temperature: 0.0,
            t,
            seed: cfg.seed,
            observable: "retrieval_frequency".into(),
            value: freq,
            std_error,
        });
    }
    Ok(records)
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{dream_coupling, energy, hebbian, mattis_overlaps, KernelKind};
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn overlap_with(ps: &PatternSet, s: &NetworkState, mu: usize) -> f64 {
        mattis_overlaps(ps, s).unwrap()[mu]
    }

    #[test]
    fn infinite_noise_gives_unbiased_spins() {
        let n = 400;
        let ps = generate_patterns(n, 3, 7).unwrap();
        let j = hebbian(&ps);
        let mut s = NetworkState::from_pattern(&ps, 0);
        let mut rng = rng::stream(11, Purpose::Thermal, 0);
        let mut acc = 0.0;
        let sweeps = 30;
        for _ in 0..sweeps {
            s = glauber_sweep(&j, &s, 0.0, &mut rng).unwrap();
            acc += overlap_with(&ps, &s, 0).abs();
        }
        let mean_abs_m = acc / sweeps as f64;
        assert!(
            mean_abs_m <= 4.0 / (n as f64).sqrt(),
            "mean |m| = {mean_abs_m}"
        );
    }

    #[test]
    fn deep_minimum_is_frozen_at_low_temperature() {
        let ps = generate_patterns(100, 1, 3).unwrap();
        let j = hebbian(&ps);
        let start = NetworkState::from_pattern(&ps, 0);
        let mut s = start.clone();
        let mut rng = rng::stream(5, Purpose::Thermal, 0);
        for _ in 0..100 {
            s = glauber_sweep(&j, &s, 50.0, &mut rng).unwrap();
        }
        assert_eq!(s.spins(), start.spins());
    }

    #[test]
    fn stationary_law_matches_exact_boltzmann_enumeration() {
        // 8 spins, enumerable exactly: the empirical distribution of the
        // chain must match Boltzmann weights in total variation.
        let n = 8;
        let ps = generate_patterns(n, 2, 21).unwrap();
        let j = dream_coupling(&ps, 1.0).unwrap();
        let beta = 0.7;
        let mut weights = vec![0.0f64; 1 << n];
        for code in 0..(1usize << n) {
            let spins: Vec<i8> = (0..n)
                .map(|i| if code >> i & 1 == 1 { 1 } else { -1 })
                .collect();
            let state = NetworkState::new(spins).unwrap();
            weights[code] = (-beta * energy(&j, &state).unwrap()).exp();
        }
        let z: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= z;
        }
        let mut s = NetworkState::from_pattern(&ps, 0);
        let mut rng = rng::stream(99, Purpose::Thermal, 0);
        let sweeps = 1_000_000usize;
        let mut counts = vec![0u64; 1 << n];
        for _ in 0..sweeps {
            s = glauber_sweep(&j, &s, beta, &mut rng).unwrap();
            let mut code = 0usize;
            for (i, &spin) in s.spins().iter().enumerate() {
                if spin == 1 {
                    code |= 1 << i;
                }
            }
            counts[code] += 1;
        }
        let tv: f64 = weights
            .iter()
            .zip(&counts)
            .map(|(w, &c)| (w - c as f64 / sweeps as f64).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.02, "total variation {tv}");
    }

    #[test]
    fn parallel_trajectories_mirror_under_global_flip() {
        let ps = generate_patterns(40, 5, 13).unwrap();
        let j = dream_coupling(&ps, 0.5).unwrap();
        let mut rng = rng::stream(3, Purpose::InitialState, 0);
        let mut plus = random_state(40, &mut rng);
        let mut minus = plus.flipped();
        for _ in 0..8 {
            plus = zero_t_parallel_step(&j, &plus).unwrap();
            minus = zero_t_parallel_step(&j, &minus).unwrap();
            assert_eq!(minus.spins(), plus.flipped().spins());
        }
    }

    #[test]
    fn pattern_is_a_one_step_parallel_fixed_point_at_small_load() {
        let ps = generate_patterns(1000, 50, 17).unwrap();
        let j = hebbian(&ps);
        let s = NetworkState::from_pattern(&ps, 0);
        let next = zero_t_parallel_step(&j, &s).unwrap();
        assert_eq!(next.spins(), s.spins());
    }

    #[test]
    fn constructed_two_cycle_is_detected() {
        // Complete-graph antiferromagnet: all spins aligned flip together,
        // forever alternating between the two uniform states.
        let n = 4;
        let mut j = DMatrix::from_element(n, n, -0.25);
        for i in 0..n {
            j[(i, i)] = 0.0;
        }
        let j = CouplingMatrix::from_matrix(j, KernelKind::Hebbian, 1).unwrap();
        let s = NetworkState::new(vec![1, 1, 1, 1]).unwrap();
        let (_, outcome) = relax_zero_t(&j, &s, UpdateMode::Parallel, 50).unwrap();
        assert!(matches!(outcome, Relaxation::TwoCycle { .. }));
        // Sequential descent settles the same instance.
        let (_, sequential) = relax_zero_t(&j, &s, UpdateMode::Sequential, 50).unwrap();
        assert!(matches!(sequential, Relaxation::FixedPoint { .. }));
    }

    #[test]
    fn sequential_descent_never_increases_energy() {
        let ps = generate_patterns(60, 6, 29).unwrap();
        let j = dream_coupling(&ps, 2.0).unwrap();
        let mut rng = rng::stream(31, Purpose::InitialState, 0);
        let mut state = random_state(60, &mut rng);
        // Instrumented walk applying the update rule one accepted flip at a
        // time, checking the Lyapunov property at each of them.
        let mut current_energy = energy(&j, &state).unwrap();
        let m = j.matrix();
        loop {
            let mut flipped_any = false;
            for i in 0..60 {
                let h = field_without_self(m, state.spins(), i);
                if (state.spins()[i] as f64) * h < 0.0 {
                    state.flip(i);
                    let next_energy = energy(&j, &state).unwrap();
                    assert!(
                        next_energy <= current_energy + 1e-12,
                        "energy rose {current_energy} -> {next_energy}"
                    );
                    current_energy = next_energy;
                    flipped_any = true;
                }
            }
            if !flipped_any {
                break;
            }
        }
        // The driver must land on the same fixed point (same deterministic
        // rule, same order).
        let start = {
            let mut r = rng::stream(31, Purpose::InitialState, 0);
            random_state(60, &mut r)
        };
        let (fixed, outcome) = relax_zero_t(&j, &start, UpdateMode::Sequential, 1000).unwrap();
        assert!(matches!(outcome, Relaxation::FixedPoint { .. }));
        assert_eq!(fixed.spins(), state.spins());
    }

    #[test]
    fn dense_and_pattern_engine_trajectories_agree() {
        let ps = generate_patterns(48, 6, 41).unwrap();
        let t = 1.3;
        let j = dream_coupling(&ps, t).unwrap();
        let mut rng_init = rng::stream(12, Purpose::InitialState, 0);
        let start = random_state(48, &mut rng_init);

        // Finite temperature: identical streams must give identical paths.
        let mut dense_state = start.clone();
        let mut rng_a = rng::stream(77, Purpose::Thermal, 0);
        let mut rng_b = rng::stream(77, Purpose::Thermal, 0);
        let mut engine = PatternEngine::new(&ps, t, &start).unwrap();
        for _ in 0..30 {
            dense_state = glauber_sweep(&j, &dense_state, 1.5, &mut rng_a).unwrap();
            engine.sweep_finite_t(1.5, &mut rng_b);
        }
        assert_eq!(engine.state().spins(), dense_state.spins());
        assert_abs_diff_eq!(
            engine.energy(),
            energy(&j, &dense_state).unwrap(),
            epsilon = 1e-9
        );
        let dense_overlaps = mattis_overlaps(&ps, &dense_state).unwrap();
        for (a, b) in engine.overlaps().iter().zip(&dense_overlaps) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }

        // Zero temperature: both paths settle identically.
        let mut dense_zero = start.clone();
        let mut engine_zero = PatternEngine::new(&ps, t, &start).unwrap();
        loop {
            let mut probe = dense_zero.clone();
            let flips = zero_t_sweep_in_place(j.matrix(), probe.spins_mut());
            let engine_flips = engine_zero.sweep_zero_t();
            assert_eq!(flips, engine_flips);
            dense_zero = probe;
            assert_eq!(engine_zero.state().spins(), dense_zero.spins());
            if flips == 0 {
                break;
            }
        }
    }

    #[test]
    fn retrieval_curve_recovers_and_melts() {
        let cfg = McConfig {
            burn_in_sweeps: 500,
            measure_sweeps: 500,
            realizations: 4,
            seed: 1234,
            ..McConfig::default()
        };
        let records = retrieval_curve(300, 6, 0.0, &[0.5, 1.2], &cfg).unwrap();
        assert_eq!(records.len(), 2);
        let cold = &records[0];
        let hot = &records[1];
        assert!(cold.value >= 0.9, "m1(T=0.5) = {}", cold.value);
        assert!(
            hot.value.abs() <= 3.0 * hot.std_error.max(0.01),
            "m1(T=1.2) = {} +- {}",
            hot.value,
            hot.std_error
        );
        for rec in &records {
            assert!(rec.value.abs() <= 1.0);
            assert!(rec.std_error >= 0.0);
            assert_eq!(rec.alpha, 6.0 / 300.0);
        }
    }

    #[test]
    fn identical_seeds_reproduce_records_bitwise() {
        let cfg = McConfig {
            burn_in_sweeps: 100,
            measure_sweeps: 100,
            realizations: 3,
            seed: 555,
            ..McConfig::default()
        };
        let a = retrieval_curve(120, 4, 1.0, &[0.6, 1.1], &cfg).unwrap();
        let b = retrieval_curve(120, 4, 1.0, &[0.6, 1.1], &cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn stderr_follows_inverse_square_root_of_repeats() {
        let (m2, e2) = mean_and_stderr(&[1.0, 3.0]);
        assert_abs_diff_eq!(m2, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e2, 1.0, epsilon = 1e-15);
        let repeated: Vec<f64> = std::iter::repeat([1.0, 3.0])
            .take(8)
            .flatten()
            .collect();
        let (m16, e16) = mean_and_stderr(&repeated);
        assert_abs_diff_eq!(m16, 2.0, epsilon = 1e-15);
        // 16 samples of the same spread: stderr must sit near 1/sqrt(8) of
        // the two-sample value (exactly sqrt(8/15)/sqrt(8) of it with the
        // sample-variance correction).
        assert_abs_diff_eq!(e16, (8.0f64 / 15.0).sqrt() / 8.0f64.sqrt(), epsilon = 1e-12);
        assert!(e16 < 0.45 * e2);
    }

    #[test]
    fn field_statistics_rank_one_is_exact() {
        let cfg = McConfig {
            zero_t: true,
            realizations: 3,
            seed: 9,
            ..McConfig::default()
        };
        let stats = field_statistics(200, 1, 0.0, &cfg).unwrap();
        assert_eq!(stats.discarded_runs, 0);
        assert_abs_diff_eq!(stats.mean, 1.0, epsilon = 1e-12);
        assert!(stats.std <= 1e-12, "std = {}", stats.std);
    }

    #[test]
    fn field_width_narrows_with_dreaming() {
        // Random starts rarely reach retrieval states before any dreaming,
        // so many relaxations (synchronous, which has the larger capture
        // region) are needed for the undreamed histogram to fill at all.
        let cfg = McConfig {
            zero_t: true,
            update_mode: UpdateMode::Parallel,
            realizations: 60,
            seed: 77,
            ..McConfig::default()
        };
        let stats: Vec<FieldStatistics> = [0.0, 1.0, 2.0]
            .iter()
            .map(|&t| field_statistics(500, 25, t, &cfg).unwrap())
            .collect();
        let widths: Vec<f64> = stats.iter().map(|s| s.std).collect();
        assert!(
            widths[0] > widths[1] && widths[1] > widths[2],
            "widths {widths:?}"
        );
        for s in &stats {
            assert_eq!(s.total_runs, 60);
            assert!(s.samples >= 500, "only {} field samples", s.samples);
            let width = s.bin_centers[1] - s.bin_centers[0];
            let area: f64 = s.densities.iter().sum::<f64>() * width;
            assert_abs_diff_eq!(area, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn uncorrupted_start_always_retrieves() {
        let cfg = McConfig {
            zero_t: true,
            realizations: 3,
            seed: 4,
            ..McConfig::default()
        };
        let records = basin_experiment(400, 20, 0.0, &[0.0], 3, &cfg).unwrap();
        assert_eq!(records[0].value, 1.0);
        assert_eq!(records[0].std_error, 0.0);
    }

    #[test]
    fn erased_start_is_near_chance() {
        let cfg = McConfig {
            zero_t: true,
            realizations: 4,
            seed: 8,
            ..McConfig::default()
        };
        let records = basin_experiment(400, 20, 0.0, &[0.5], 5, &cfg).unwrap();
        assert!(
            records[0].value <= 0.3,
            "frequency from erased starts = {}",
            records[0].value
        );
    }

    #[test]
    fn dreaming_widens_the_basin_at_intermediate_corruption() {
        let cfg = McConfig {
            zero_t: true,
            realizations: 6,
            seed: 15,
            ..McConfig::default()
        };
        let fresh = basin_experiment(500, 25, 0.0, &[0.25], 6, &cfg).unwrap();
        let dreamed = basin_experiment(500, 25, 1000.0, &[0.25], 6, &cfg).unwrap();
        let slack = 2.0 * (fresh[0].std_error.powi(2) + dreamed[0].std_error.powi(2)).sqrt();
        assert!(
            dreamed[0].value >= fresh[0].value - slack,
            "freq(t=1000) = {} vs freq(t=0) = {} (slack {slack})",
            dreamed[0].value,
            fresh[0].value
        );
    }

    #[test]
    fn configs_are_validated() {
        let bad_counts = McConfig {
            burn_in_sweeps: 0,
            ..McConfig::default()
        };
        assert!(bad_counts.validate().is_err());
        let bad_beta = McConfig {
            beta: f64::NAN,
            ..McConfig::default()
        };
        assert!(bad_beta.validate().is_err());
        let parallel_hot = McConfig {
            update_mode: UpdateMode::Parallel,
            ..McConfig::default()
        };
        assert!(parallel_hot.validate().is_err());
        let parallel_cold = McConfig {
            update_mode: UpdateMode::Parallel,
            zero_t: true,
            ..McConfig::default()
        };
        assert!(parallel_cold.validate().is_ok());

        let cfg = McConfig::default();
        assert!(retrieval_curve(10, 2, -1.0, &[0.5], &cfg).is_err());
        assert!(retrieval_curve(10, 2, 0.0, &[0.0], &cfg).is_err());
        assert!(retrieval_curve(0, 2, 0.0, &[0.5], &cfg).is_err());
        let cold = McConfig {
            zero_t: true,
            ..McConfig::default()
        };
        assert!(basin_experiment(10, 2, 0.0, &[1.5], 2, &cold).is_err());
        assert!(basin_experiment(10, 2, 0.0, &[0.1], 0, &cold).is_err());
        assert!(field_statistics(10, 2, 0.0, &cfg).is_err());
        assert!(basin_experiment(10, 2, 0.0, &[0.1], 2, &cfg).is_err());
    }
}
