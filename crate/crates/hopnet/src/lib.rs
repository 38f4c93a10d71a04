//! Associative-memory networks with sleep-like coupling refinement.
//!
//! This crate implements a binary recurrent network whose couplings are built
//! from stored patterns and then refined by an unlearning-and-consolidation
//! ("dreaming") process. It provides:
//!
//! - pattern generation and empirical pattern-correlation analysis
//!   ([`patterns`]),
//! - coupling constructions: Hebbian, dreamed (with sleep extent `t`),
//!   Dotsenko-rescaled, and the projector endpoint ([`kernel`]),
//! - the discrete and continuous dreaming dynamics with convergence
//!   diagnostics and critical unlearning strengths ([`dreaming`]),
//! - replica-symmetric mean-field theory at zero and finite temperature:
//!   order-parameter solvers, free energies, capacity and phase lines
//!   ([`meanfield`]),
//! - Glauber Monte Carlo dynamics with retrieval, field-distribution, and
//!   basin-of-attraction experiments ([`glauber`]).
//!
//! All stochastic operations take explicit seeds and are bitwise reproducible
//! across runs at fixed thread counts.

pub mod dreaming;
pub mod error;
pub mod glauber;
pub mod kernel;
pub(crate) mod linalg;
pub mod meanfield;
pub mod patterns;
pub mod rng;

pub use error::{Error, Result};
pub use glauber::{ExperimentRecord, FieldStatistics, McConfig, Relaxation, UpdateMode};
pub use kernel::{CouplingMatrix, KernelKind, NetworkState};
pub use patterns::{CorrelationMatrix, PatternSet};
