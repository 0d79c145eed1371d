//! Constrained-QUBO toolkit: quadratic and linear Ising penalty encodings,
//! an exhaustive oracle, penalty-strength search, and closed-system
//! statevector simulators for quantum annealing and QAOA.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the corpus
//! and the experiment harness live in the `linpen` companion crate.
//!
//! Bit conventions used throughout: a basis index `k` encodes the
//! assignment `x_i = (k >> i) & 1`, and the Ising spin of variable `i` is
//! `s_i = 1 - 2 x_i`.

#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod anneal;
pub mod error;
pub mod exact;
pub mod instance;
pub mod optim;
pub mod penalty;
pub mod qaoa;
pub mod qubo;
pub mod search;

pub use anneal::{AnnealSchedule, RunMetrics, Statevector};
pub use error::{Error, Result};
pub use exact::{brute_force, feasibility_report, min_objective_by_weight, ExactSummary};
pub use instance::{CMatrix, SingleQuarterInstance, TwoQuarterInstance};
pub use penalty::{
    Constraint, ConstraintSet, EqualityConstraint, PairInequalityConstraint, Penalty,
    PenaltyScheme,
};
pub use qaoa::{QaoaParams, QaoaRunConfig, Shots};
pub use qubo::{BitString, IsingModel, NormalizationReport, QuboProblem};
pub use search::{AlphaInterval, GridScanResult, WeightSet};

/// Absolute tolerance used when comparing energies for degeneracy and when
/// testing real-valued equality constraints.
pub const ENERGY_TOL: f64 = 1e-9;
