//! Synaptic coupling matrices and quadratic observables.
//!
//! Four couplings are built from one pattern set:
//!
//! ```text
//! Hebbian     J_ij = (1/N) sum_u  xi_i^u xi_j^u
//! dream(t)    J_ij = (1/N) sum_uv xi_i^u [(1+t)(I + tC)^-1]_uv xi_j^v
//! dotsenko(t) J_ij = dream(t)_ij / (1+t)
//! projector   J_ij = (1/N) sum_uv xi_i^u (C^-1)_uv xi_j^v
//! ```
//!
//! The dream kernel interpolates from the Hebbian matrix at t = 0 to the
//! projector as t -> infinity. Couplings carry their full double sums
//! (diagonal included); energies and dynamics exclude the self-coupling.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::patterns::{correlation_matrix, CorrelationMatrix, PatternSet};

/// Sleep extents above this threshold switch the kernel solve to the exact
/// spectral form, which stays well-conditioned arbitrarily deep into the
/// projector limit.
const HUGE_T: f64 = 1e8;

// ============================================================================
// Types
// ============================================================================

/// Which construction produced a coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// Plain Hebbian outer-product rule.
    Hebbian,
    /// Dream kernel (1+t)(I + tC)^-1 at sleep extent t.
    Dream { t: f64 },
    /// Dotsenko kernel (I + tC)^-1 at sleep extent t.
    Dotsenko { t: f64 },
    /// Pseudo-inverse (projector) rule.
    Projector,
}

impl KernelKind {
    fn code(self) -> u8 {
        match self {
            KernelKind::Hebbian => 0,
            KernelKind::Dream { .. } => 1,
            KernelKind::Dotsenko { .. } => 2,
            KernelKind::Projector => 3,
        }
    }

    fn t(self) -> f64 {
        match self {
            KernelKind::Dream { t } | KernelKind::Dotsenko { t } => t,
            _ => 0.0,
        }
    }
}

/// An N x N symmetric synaptic matrix together with its provenance.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    j: DMatrix<f64>,
    kind: KernelKind,
    p: usize,
    seed: Option<u64>,
}

impl CouplingMatrix {
    /// The dense matrix J.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    /// Construction tag.
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Neuron count N.
    pub fn n(&self) -> usize {
        self.j.nrows()
    }

    /// Pattern count P of the generating set.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Seed of the generating pattern set, when known.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Wraps a raw symmetric matrix produced elsewhere (validation paths).
    pub fn from_matrix(j: DMatrix<f64>, kind: KernelKind, p: usize) -> Result<Self> {
        linalg::require_symmetric(&j, 1e-9)?;
        let mut j = j;
        linalg::symmetrize(&mut j);
        Ok(Self {
            j,
            kind,
            p,
            seed: None,
        })
    }

    /// Writes the dense matrix as CSV, one row per line.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.n();
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            row.clear();
            for j in 0..n {
                row.push(format!("{:.17e}", self.j[(i, j)]));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Binary dump with a header recording {kind, t, N, P, seed}.
    pub fn to_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"HOPJ")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&[self.kind.code()])?;
        w.write_all(&self.kind.t().to_le_bytes())?;
        w.write_all(&(self.n() as u64).to_le_bytes())?;
        w.write_all(&(self.p as u64).to_le_bytes())?;
        w.write_all(&[self.seed.is_some() as u8])?;
        w.write_all(&self.seed.unwrap_or(0).to_le_bytes())?;
        for j in 0..self.n() {
            for i in 0..self.n() {
                w.write_all(&self.j[(i, j)].to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a dump written by [`CouplingMatrix::to_binary`].
    pub fn from_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"HOPJ" {
            return Err(Error::Parse("bad coupling dump magic".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        if u32::from_le_bytes(u32buf) != 1 {
            return Err(Error::Parse("unsupported coupling dump version".into()));
        }
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)?;
        let code = byte[0];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let t = f64::from_le_bytes(f64buf);
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let n = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)?;
        let p = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut byte)?;
        let has_seed = byte[0] != 0;
        r.read_exact(&mut u64buf)?;
        let seed = has_seed.then_some(u64::from_le_bytes(u64buf));
        let kind = match code {
            0 => KernelKind::Hebbian,
            1 => KernelKind::Dream { t },
            2 => KernelKind::Dotsenko { t },
            3 => KernelKind::Projector,
            other => return Err(Error::Parse(format!("unknown kernel kind code {other}"))),
        };
        let mut data = vec![0.0f64; n * n];
        for v in data.iter_mut() {
            r.read_exact(&mut f64buf)?;
            *v = f64::from_le_bytes(f64buf);
        }
        let j = DMatrix::from_vec(n, n, data);
        Ok(Self { j, kind, p, seed })
    }
}

/// A network configuration: N spins in {-1, +1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    sigma: Vec<i8>,
}

impl NetworkState {
    /// Validates that every entry is -1 or +1.
    pub fn new(sigma: Vec<i8>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::InvalidDimension {
                what: "network state",
                details: "empty spin vector".into(),
            });
        }
        if let Some((index, &value)) = sigma.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(Error::NotSpin { index, value });
        }
        Ok(Self { sigma })
    }

    /// The state equal to pattern mu of `ps`.
    pub fn from_pattern(ps: &PatternSet, mu: usize) -> Self {
        Self {
            sigma: ps.pattern(mu).to_vec(),
        }
    }

    /// Spins as a slice.
    pub fn spins(&self) -> &[i8] {
        &self.sigma
    }

    /// Number of spins.
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    /// True when the state holds no spins (never for validated states).
    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// The globally flipped state -sigma.
    pub fn flipped(&self) -> Self {
        Self {
            sigma: self.sigma.iter().map(|&s| -s).collect(),
        }
    }

    /// Flips spin i in place.
    pub fn flip(&mut self, i: usize) {
        self.sigma[i] = -self.sigma[i];
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.sigma
    }
}

// ============================================================================
// Construction
// ============================================================================

/// Patterns as a P x N double-precision matrix (row mu = pattern mu).
pub(crate) fn pattern_matrix(ps: &PatternSet) -> DMatrix<f64> {
    DMatrix::from_fn(ps.p(), ps.n(), |mu, i| ps.entry(mu, i) as f64)
}

/// The P x P dream kernel K(t) = (1+t)(I + tC)^-1.
///
/// For t <= 1e8 the inverse is applied through a Cholesky factorization of
/// the SPD matrix I + tC; beyond that the kernel is evaluated exactly on the
/// eigenbasis of C as (1+t)/(1+t*lambda), which remains stable all the way
/// to the projector limit.
pub fn dream_kernel(c: &CorrelationMatrix, t: f64) -> Result<DMatrix<f64>> {
    if t < 0.0 {
        return Err(Error::NegativeSleepExtent { t });
    }
    let p = c.p();
    if t <= HUGE_T {
        let b = DMatrix::identity(p, p) + c.matrix() * t;
        let chol = b.cholesky().ok_or(Error::FactorizationFailed {
            what: "I + t*C kernel solve",
        })?;
        let mut k = chol.inverse();
        k *= 1.0 + t;
        linalg::symmetrize(&mut k);
        Ok(k)
    } else {
        let (vals, vecs) = linalg::sym_eigen(c.matrix());
        let scaled = DVector::from_fn(p, |i, _| (1.0 + t) / (1.0 + t * vals[i].max(0.0)));
        let mut k = &vecs * DMatrix::from_diagonal(&scaled) * vecs.transpose();
        linalg::symmetrize(&mut k);
        Ok(k)
    }
}

fn assemble(ps: &PatternSet, kernel: Option<&DMatrix<f64>>, kind: KernelKind) -> CouplingMatrix {
    let xi = pattern_matrix(ps);
    let mut j = match kernel {
        Some(k) => xi.transpose() * (k * &xi),
        None => xi.transpose() * &xi,
    };
    j /= ps.n() as f64;
    linalg::symmetrize(&mut j);
    CouplingMatrix {
        j,
        kind,
        p: ps.p(),
        seed: ps.seed(),
    }
}

/// Hebbian coupling J = (1/N) Xi^T Xi, diagonal P/N retained.
pub fn hebbian(ps: &PatternSet) -> CouplingMatrix {
    assemble(ps, None, KernelKind::Hebbian)
}

/// Dream coupling J(t) = (1/N) Xi^T (1+t)(I + tC)^-1 Xi.
pub fn dream_coupling(ps: &PatternSet, t: f64) -> Result<CouplingMatrix> {
    let c = correlation_matrix(ps);
    let k = dream_kernel(&c, t)?;
    Ok(assemble(ps, Some(&k), KernelKind::Dream { t }))
}

/// Dotsenko coupling J(t) = (1/N) Xi^T (I + tC)^-1 Xi = dream(t)/(1+t).
pub fn dotsenko_coupling(ps: &PatternSet, t: f64) -> Result<CouplingMatrix> {
    let c = correlation_matrix(ps);
    let mut k = dream_kernel(&c, t)?;
    k /= 1.0 + t;
    Ok(assemble(ps, Some(&k), KernelKind::Dotsenko { t }))
}

/// Projector (pseudo-inverse) coupling J^p = (1/N) Xi^T C^-1 Xi.
///
/// Errors when C is singular (linearly dependent patterns, or P > N),
/// reporting the smallest eigenvalue.
pub fn projector(ps: &PatternSet) -> Result<CouplingMatrix> {
    let c = correlation_matrix(ps);
    let (vals, _) = linalg::sym_eigen(c.matrix());
    let min_eig = vals[0];
    if min_eig <= 1e-10 {
        return Err(Error::SingularCorrelation {
            min_eigenvalue: min_eig,
        });
    }
    let chol = c
        .matrix()
        .clone()
        .cholesky()
        .ok_or(Error::SingularCorrelation {
            min_eigenvalue: min_eig,
        })?;
    let k = chol.inverse();
    Ok(assemble(ps, Some(&k), KernelKind::Projector))
}

// ============================================================================
// Observables
// ============================================================================

fn require_state_len(n: usize, s: &NetworkState) -> Result<()> {
    if s.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.len(),
        });
    }
    Ok(())
}

/// Internal fields h_i = sum_j J_ij sigma_j (full product, diagonal included).
///
/// Dynamics and energies exclude the self-coupling separately; this routine
/// reports the raw matrix-vector product.
pub fn local_fields(j: &CouplingMatrix, s: &NetworkState) -> Result<Vec<f64>> {
    require_state_len(j.n(), s)?;
    let n = j.n();
    let m = j.matrix();
    let mut h = vec![0.0f64; n];
    for col in 0..n {
        let sig = s.spins()[col] as f64;
        let column = m.column(col);
        for row in 0..n {
            h[row] += column[row] * sig;
        }
    }
    Ok(h)
}

/// Mattis overlaps m_u = (1/N) sum_i xi_i^u sigma_i for every pattern.
pub fn mattis_overlaps(ps: &PatternSet, s: &NetworkState) -> Result<Vec<f64>> {
    require_state_len(ps.n(), s)?;
    let n = ps.n();
    let mut m = Vec::with_capacity(ps.p());
    for mu in 0..ps.p() {
        let row = ps.pattern(mu);
        let mut acc: i64 = 0;
        for i in 0..n {
            acc += (row[i] * s.spins()[i]) as i64;
        }
        m.push(acc as f64 / n as f64);
    }
    Ok(m)
}

/// Energy H = -(1/2) sum_{i != j} J_ij sigma_i sigma_j.
///
/// The self-coupling is excluded; since sigma_i^2 = 1 this equals
/// -(sigma^T J sigma - tr J)/2.
pub fn energy(j: &CouplingMatrix, s: &NetworkState) -> Result<f64> {
    require_state_len(j.n(), s)?;
    let h = local_fields(j, s)?;
    let m = j.matrix();
    let mut quad = 0.0;
    let mut trace = 0.0;
    for i in 0..j.n() {
        quad += h[i] * s.spins()[i] as f64;
        trace += m[(i, i)];
    }
    Ok(-0.5 * (quad - trace))
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::generate_patterns;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn op_norm_diff(a: &CouplingMatrix, b: &CouplingMatrix) -> f64 {
        linalg::op_norm_sym(&(a.matrix() - b.matrix()))
    }

    fn hand_instance() -> PatternSet {
        // xi1 = (+,+,+,+), xi2 = (+,+,-,-): orthogonal-ish with overlap 0.
        PatternSet::from_entries(4, 2, vec![1, 1, 1, 1, 1, 1, -1, -1], None).unwrap()
    }

    fn correlated_instance() -> PatternSet {
        // xi1 = (+,+,+,+), xi2 = (+,+,+,-): overlap C12 = 0.5.
        PatternSet::from_entries(4, 2, vec![1, 1, 1, 1, 1, 1, 1, -1], None).unwrap()
    }

    #[test]
    fn hebbian_rank_one() {
        let ps = generate_patterns(6, 1, 5).unwrap();
        let j = hebbian(&ps);
        for i in 0..6 {
            for k in 0..6 {
                let expect = (ps.entry(0, i) * ps.entry(0, k)) as f64 / 6.0;
                assert_abs_diff_eq!(j.matrix()[(i, k)], expect, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn hebbian_two_spin_instance() {
        let ps = PatternSet::from_entries(2, 1, vec![1, 1], None).unwrap();
        let j = hebbian(&ps);
        for i in 0..2 {
            for k in 0..2 {
                assert_abs_diff_eq!(j.matrix()[(i, k)], 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn hebbian_hand_summation() {
        let ps = correlated_instance();
        let j = hebbian(&ps);
        // J_01 = (1*1 + 1*1)/4 = 0.5; J_03 = (1*1 + 1*(-1))/4 = 0; J_23 = 0.
        assert_abs_diff_eq!(j.matrix()[(0, 1)], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(j.matrix()[(0, 3)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.matrix()[(2, 3)], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(j.matrix()[(0, 0)], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn dream_at_zero_is_hebbian() {
        let ps = generate_patterns(24, 6, 11).unwrap();
        let d = dream_coupling(&ps, 0.0).unwrap();
        let h = hebbian(&ps);
        assert!(op_norm_diff(&d, &h) <= 1e-12);
    }

    #[test]
    fn dream_with_orthogonal_patterns_is_hebbian_for_all_t() {
        let ps = hand_instance();
        let h = hebbian(&ps);
        for &t in &[0.3, 1.0, 17.0, 4000.0] {
            let d = dream_coupling(&ps, t).unwrap();
            assert!(op_norm_diff(&d, &h) <= 1e-10, "t = {t}");
        }
    }

    #[test]
    fn dream_rejects_negative_t() {
        let ps = hand_instance();
        assert!(matches!(
            dream_coupling(&ps, -0.5),
            Err(Error::NegativeSleepExtent { .. })
        ));
    }

    #[test]
    fn dream_large_t_approaches_projector() {
        let ps = generate_patterns(32, 6, 23).unwrap();
        let d = dream_coupling(&ps, 1e6).unwrap();
        let p = projector(&ps).unwrap();
        assert!(op_norm_diff(&d, &p) <= 1e-4);
    }

    #[test]
    fn dream_huge_t_branch_matches_projector() {
        let ps = generate_patterns(32, 6, 29).unwrap();
        let d = dream_coupling(&ps, 1e12).unwrap();
        let p = projector(&ps).unwrap();
        assert!(op_norm_diff(&d, &p) <= 1e-8);
    }

    #[test]
    fn projector_rank_one_is_hebbian() {
        let ps = generate_patterns(9, 1, 2).unwrap();
        assert!(op_norm_diff(&projector(&ps).unwrap(), &hebbian(&ps)) <= 1e-12);
    }

    #[test]
    fn projector_orthogonal_is_hebbian() {
        let ps = hand_instance();
        assert!(op_norm_diff(&projector(&ps).unwrap(), &hebbian(&ps)) <= 1e-12);
    }

    #[test]
    fn projector_matches_hand_inverted_correlation() {
        let ps = correlated_instance();
        // C = [[1, .5], [.5, 1]], C^-1 = (1/0.75) [[1, -.5], [-.5, 1]].
        let xi = pattern_matrix(&ps);
        let cinv = DMatrix::from_row_slice(2, 2, &[4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0]);
        let expect = xi.transpose() * cinv * &xi / 4.0;
        let p = projector(&ps).unwrap();
        assert!(linalg::op_norm_sym(&(p.matrix() - expect)) <= 1e-12);
    }

    #[test]
    fn projector_is_idempotent() {
        let ps = generate_patterns(24, 8, 37).unwrap();
        let p = projector(&ps).unwrap();
        let sq = p.matrix() * p.matrix();
        assert!(linalg::op_norm_sym(&(sq - p.matrix())) <= 1e-8);
    }

    #[test]
    fn projector_rejects_duplicate_patterns() {
        let ps = PatternSet::from_entries(3, 2, vec![1, -1, 1, 1, -1, 1], None).unwrap();
        assert!(matches!(
            projector(&ps),
            Err(Error::SingularCorrelation { .. })
        ));
    }

    #[test]
    fn dotsenko_is_scaled_dream() {
        let ps = generate_patterns(20, 5, 41).unwrap();
        for &t in &[0.0, 0.7, 12.0] {
            let dot = dotsenko_coupling(&ps, t).unwrap();
            let mut dream = dream_coupling(&ps, t).unwrap();
            dream.j /= 1.0 + t;
            assert!(op_norm_diff(&dot, &dream) <= 1e-12, "t = {t}");
        }
    }

    #[test]
    fn dotsenko_norm_vanishes_at_large_t() {
        let ps = generate_patterns(24, 4, 43).unwrap();
        let dot = dotsenko_coupling(&ps, 1e6).unwrap();
        let proj = projector(&ps).unwrap();
        let bound = 2.0 * linalg::op_norm_sym(proj.matrix()) / 1e6;
        assert!(linalg::op_norm_sym(dot.matrix()) <= bound);
    }

    #[test]
    fn fields_rank_one_recover_pattern() {
        let ps = generate_patterns(10, 1, 3).unwrap();
        let j = hebbian(&ps);
        let s = NetworkState::from_pattern(&ps, 0);
        let h = local_fields(&j, &s).unwrap();
        for i in 0..10 {
            assert_abs_diff_eq!(h[i], ps.entry(0, i) as f64, epsilon = 1e-15);
        }
    }

    #[test]
    fn fields_negate_with_state() {
        let ps = generate_patterns(12, 3, 8).unwrap();
        let j = dream_coupling(&ps, 1.0).unwrap();
        let s = NetworkState::from_pattern(&ps, 1);
        let h = local_fields(&j, &s).unwrap();
        let h_neg = local_fields(&j, &s.flipped()).unwrap();
        for i in 0..12 {
            assert_abs_diff_eq!(h[i], -h_neg[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn fields_match_naive_triple_loop() {
        let ps = correlated_instance();
        let j = dream_coupling(&ps, 1.0).unwrap();
        let s = NetworkState::new(vec![1, -1, 1, -1]).unwrap();
        let h = local_fields(&j, &s).unwrap();
        for i in 0..4 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += j.matrix()[(i, k)] * s.spins()[k] as f64;
            }
            assert_abs_diff_eq!(h[i], acc, epsilon = 1e-14);
        }
    }

    #[test]
    fn mattis_overlap_at_patterns() {
        let ps = generate_patterns(30, 4, 13).unwrap();
        let s = NetworkState::from_pattern(&ps, 0);
        let m = mattis_overlaps(&ps, &s).unwrap();
        assert_abs_diff_eq!(m[0], 1.0);
        let m_neg = mattis_overlaps(&ps, &s.flipped()).unwrap();
        assert_abs_diff_eq!(m_neg[0], -1.0);
    }

    #[test]
    fn mattis_overlap_of_sign_mixture() {
        // N = 6 mixture sigma = sign(xi1 + xi2 + xi3), checked by hand.
        let entries = vec![
            1, 1, -1, -1, 1, -1, // xi1
            1, -1, 1, -1, 1, 1, // xi2
            1, 1, 1, -1, -1, -1, // xi3
        ];
        let ps = PatternSet::from_entries(6, 3, entries, None).unwrap();
        // xi1+xi2+xi3 = (3, 1, 1, -3, 1, -1) -> sigma = (+,+,+,-,+,-).
        let s = NetworkState::new(vec![1, 1, 1, -1, 1, -1]).unwrap();
        let m = mattis_overlaps(&ps, &s).unwrap();
        // Hand sums: m1 = (1+1-1+1+1+1)/6, m2 = (1-1+1+1+1-1)/6,
        // m3 = (1+1+1+1-1+1)/6.
        assert_abs_diff_eq!(m[0], 4.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1], 2.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[2], 4.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn energy_rank_one_ground_state() {
        let ps = generate_patterns(14, 1, 21).unwrap();
        let j = hebbian(&ps);
        let s = NetworkState::from_pattern(&ps, 0);
        assert_abs_diff_eq!(energy(&j, &s).unwrap(), -(14.0 - 1.0) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_is_flip_symmetric() {
        let ps = generate_patterns(16, 4, 19).unwrap();
        let j = dream_coupling(&ps, 2.0).unwrap();
        let s = NetworkState::from_pattern(&ps, 2);
        assert_abs_diff_eq!(
            energy(&j, &s).unwrap(),
            energy(&j, &s.flipped()).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn energy_matches_brute_force() {
        let ps = generate_patterns(8, 3, 17).unwrap();
        let j = dream_coupling(&ps, 0.5).unwrap();
        let s = NetworkState::new(vec![1, -1, -1, 1, 1, -1, 1, 1]).unwrap();
        let mut brute = 0.0;
        for i in 0..8 {
            for k in 0..8 {
                if i != k {
                    brute += j.matrix()[(i, k)] * (s.spins()[i] * s.spins()[k]) as f64;
                }
            }
        }
        assert_abs_diff_eq!(energy(&j, &s).unwrap(), -0.5 * brute, epsilon = 1e-12);
    }

    #[test]
    fn kernel_matrix_identity() {
        // dream(t) = (1+t) J0 (I + t J0)^-1 with J0 the Hebbian matrix.
        let ps = generate_patterns(48, 12, 53).unwrap();
        let j0 = hebbian(&ps);
        for &t in &[0.1, 1.0, 10.0, 100.0] {
            let d = dream_coupling(&ps, t).unwrap();
            let n = ps.n();
            let b = DMatrix::identity(n, n) + j0.matrix() * t;
            let chol = b.cholesky().unwrap();
            let rhs = chol.solve(j0.matrix());
            let expect = rhs * (1.0 + t);
            let diff = linalg::op_norm_sym(&{
                let mut d2 = d.matrix() - expect;
                linalg::symmetrize(&mut d2);
                d2
            });
            assert!(diff <= 1e-8, "t = {t}, diff = {diff:.3e}");
        }
    }

    #[test]
    fn distance_to_projector_is_monotone() {
        let ps = generate_patterns(40, 8, 59).unwrap();
        let proj = projector(&ps).unwrap();
        let mut last = f64::INFINITY;
        for &t in &[0.0, 1.0, 10.0, 1e2, 1e3, 1e4] {
            let d = dream_coupling(&ps, t).unwrap();
            let dist = op_norm_diff(&d, &proj);
            assert!(
                dist <= last + 1e-12,
                "distance increased at t = {t}: {dist} > {last}"
            );
            last = dist;
        }
    }

    #[test]
    fn binary_round_trip() {
        let ps = generate_patterns(10, 3, 61).unwrap();
        let j = dream_coupling(&ps, 2.5).unwrap();
        let mut buf = Vec::new();
        j.to_binary(&mut buf).unwrap();
        let back = CouplingMatrix::from_binary(buf.as_slice()).unwrap();
        assert_eq!(back.n(), 10);
        assert_eq!(back.p(), 3);
        assert_eq!(back.seed(), Some(61));
        assert!(matches!(back.kind(), KernelKind::Dream { t } if (t - 2.5).abs() < 1e-15));
        assert_abs_diff_eq!((back.matrix() - j.matrix()).norm(), 0.0);
    }

    #[test]
    fn csv_export_writes_square_table() {
        let ps = generate_patterns(5, 2, 67).unwrap();
        let j = hebbian(&ps);
        let mut buf = Vec::new();
        j.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.trim().lines().collect();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| r.split(',').count() == 5));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        /// Overlap of sigma = xi^mu against pattern nu equals C_mu,nu.
        #[test]
        fn overlaps_at_patterns_reproduce_correlations(seed in 0u64..3000) {
            let ps = generate_patterns(18, 5, seed).unwrap();
            let c = correlation_matrix(&ps);
            for mu in 0..5 {
                let s = NetworkState::from_pattern(&ps, mu);
                let m = mattis_overlaps(&ps, &s).unwrap();
                for nu in 0..5 {
                    prop_assert!((m[nu] - c.matrix()[(mu, nu)]).abs() <= 1e-12);
                }
            }
        }

        /// Every construction yields an exactly symmetric matrix.
        #[test]
        fn constructions_are_symmetric(seed in 0u64..3000, t in 0.0f64..50.0) {
            let ps = generate_patterns(16, 4, seed).unwrap();
            for j in [hebbian(&ps), dream_coupling(&ps, t).unwrap(), dotsenko_coupling(&ps, t).unwrap()] {
                prop_assert_eq!(linalg::max_asymmetry(j.matrix()), 0.0);
            }
        }
    }
}
