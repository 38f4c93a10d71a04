//! Quenched pattern sets and their correlation structure.
//!
//! Patterns are P binary vectors of length N with entries in {-1, +1},
//! drawn independently and uniformly from a seeded stream. Their pairwise
//! overlaps form the correlation matrix
//!
//! ```text
//! C_uv = (1/N) sum_i xi_i^u xi_i^v
//! ```
//!
//! which drives both the dream kernel and the critical unlearning strength.

use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;
use rand_chacha::rand_core::RngCore;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::{self, Purpose};

// ============================================================================
// PatternSet
// ============================================================================

/// P patterns of length N with entries in {-1, +1}, stored row-major
/// (pattern index major) as signed bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSet {
    n: usize,
    p: usize,
    entries: Vec<i8>,
    seed: Option<u64>,
}

impl PatternSet {
    /// Builds a pattern set from raw entries (row-major, pattern-major).
    ///
    /// `seed` records the generation seed when known; externally loaded sets
    /// carry `None`.
    pub fn from_entries(n: usize, p: usize, entries: Vec<i8>, seed: Option<u64>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidDimension {
                what: "pattern set",
                details: format!("n = {n}, p = {p}; both must be at least 1"),
            });
        }
        if entries.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                got: entries.len(),
            });
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &e)| e != 1 && e != -1)
        {
            return Err(Error::NotSpin { index, value });
        }
        Ok(Self {
            n,
            p,
            entries,
            seed,
        })
    }

    /// Neuron count N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Pattern count P.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Load ratio alpha = P/N.
    pub fn alpha(&self) -> f64 {
        self.p as f64 / self.n as f64
    }

    /// Seed used for generation, if the set was generated in-process.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Pattern mu as a slice of +-1 entries.
    pub fn pattern(&self, mu: usize) -> &[i8] {
        &self.entries[mu * self.n..(mu + 1) * self.n]
    }

    /// Entry xi_i^mu.
    pub fn entry(&self, mu: usize, i: usize) -> i8 {
        self.entries[mu * self.n + i]
    }

    /// All entries, pattern-major.
    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// Writes the set as CSV: one row per pattern, entries -1/+1.
    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for mu in 0..self.p {
            let row: Vec<String> = self.pattern(mu).iter().map(|e| e.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads a set written by [`PatternSet::to_csv`]. The generation seed is
    /// not part of the dump, so the result carries `seed = None`.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut entries = Vec::new();
        let mut n = None;
        let mut p = 0;
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<i8> = line
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<i8>()
                        .map_err(|e| Error::Parse(format!("bad pattern entry {tok:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            match n {
                None => n = Some(row.len()),
                Some(len) if len != row.len() => {
                    return Err(Error::Parse(format!(
                        "ragged pattern rows: {len} vs {}",
                        row.len()
                    )))
                }
                _ => {}
            }
            entries.extend_from_slice(&row);
            p += 1;
        }
        let n = n.ok_or_else(|| Error::Parse("empty pattern dump".into()))?;
        Self::from_entries(n, p, entries, None)
    }
}

/// Draws P independent fair +-1 patterns of length N from the seeded stream.
///
/// Deterministic: the same `(n, p, seed)` triple always yields the same set.
pub fn generate_patterns(n: usize, p: usize, seed: u64) -> Result<PatternSet> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidDimension {
            what: "pattern set",
            details: format!("n = {n}, p = {p}; both must be at least 1"),
        });
    }
    let mut rng = rng::stream(seed, Purpose::Patterns, 0);
    let mut entries = Vec::with_capacity(n * p);
    for _ in 0..n * p {
        entries.push(if rng.next_u32() & 1 == 1 { 1 } else { -1 });
    }
    Ok(PatternSet {
        n,
        p,
        entries,
        seed: Some(seed),
    })
}

// ============================================================================
// CorrelationMatrix
// ============================================================================

/// The P x P pattern correlation matrix C with its cached spectral norm.
///
/// Invariants established at construction: unit diagonal, exact symmetry,
/// positive semi-definiteness (Gram structure), trace P, spectral norm >= 1.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    c: DMatrix<f64>,
    norm: f64,
}

impl CorrelationMatrix {
    /// The matrix C.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Cached spectral norm (largest eigenvalue).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Pattern count P.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    /// Builds a correlation matrix from an explicit symmetric PSD matrix.
    ///
    /// Intended for analytic test instances; generated data should go
    /// through [`correlation_matrix`].
    pub fn from_matrix(c: DMatrix<f64>) -> Result<Self> {
        linalg::require_symmetric(&c, 1e-12)?;
        let norm = spectral_norm(&c)?;
        Ok(Self { c, norm })
    }
}

/// Computes C_uv = (1/N) sum_i xi_i^u xi_i^v for the whole set.
///
/// Dot products are accumulated in integer arithmetic, so the unit diagonal
/// and symmetry are exact.
pub fn correlation_matrix(ps: &PatternSet) -> CorrelationMatrix {
    let p = ps.p();
    let n = ps.n();
    let mut c = DMatrix::zeros(p, p);
    for mu in 0..p {
        c[(mu, mu)] = 1.0;
        let row_mu = ps.pattern(mu);
        for nu in (mu + 1)..p {
            let row_nu = ps.pattern(nu);
            let mut acc: i64 = 0;
            for i in 0..n {
                acc += (row_mu[i] * row_nu[i]) as i64;
            }
            let val = acc as f64 / n as f64;
            c[(mu, nu)] = val;
            c[(nu, mu)] = val;
        }
    }
    let norm = spectral_norm(&c).expect("correlation matrix is symmetric by construction");
    CorrelationMatrix { c, norm }
}

/// Spectral norm (largest eigenvalue) of a symmetric PSD matrix.
///
/// Power iteration with relative tolerance 1e-12 is tried first; if it has
/// not stabilized within the iteration cap and the matrix is small
/// (dimension <= 64), a dense symmetric eigensolver supplies the answer.
///
/// Errors on non-symmetric input.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    linalg::require_symmetric(m, 1e-12)?;
    if let Some(lambda) = linalg::power_iteration_max_eig(m, 1e-12, 50_000) {
        return Ok(lambda);
    }
    if m.nrows() <= 64 {
        return Ok(linalg::op_norm_sym(m));
    }
    Err(Error::NonConvergence {
        iterations: 50_000,
        residual: f64::NAN,
    })
}

// ============================================================================
// Tests
// ============================================================================
