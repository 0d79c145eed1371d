//! Promotion-cannibalization instances: the cannibalization matrix `C`,
//! single- and two-quarter problems, and their QUBO/constraint builders.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};
use crate::penalty::{ConstraintSet, EqualityConstraint, PairInequalityConstraint};
use crate::qubo::QuboProblem;

/// Lower end of the generator's uniform range for off-diagonal entries.
pub const C_MIN: f64 = 0.1;
/// Exclusive upper end of the generator's uniform range.
pub const C_MAX: f64 = 1.0;

const SYMMETRY_TOL: f64 = 1e-12;

/// Label of the single-quarter budget constraint.
pub const BUDGET_LABEL: &str = "budget";

/// Dense, symmetric, non-negative `n_p × n_p` matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl CMatrix {
    /// Validates and wraps row-major `entries`.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Dimension { expected: n * n, found: entries.len() });
        }
        for i in 0..n {
            if entries[i * n + i] != 0.0 {
                return Err(Error::Validation(format!("C[{i}][{i}] must be 0")));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Validation(format!("C[{i}][{j}] = {v} is not a non-negative number")));
                }
                if (v - entries[j * n + i]).abs() > SYMMETRY_TOL {
                    return Err(Error::Validation(format!("C is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(CMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    /// Seeded random matrix: the pairs `i < j` are visited in row-major
    /// order and each draws `U[0.1, 1.0)` from ChaCha8 seeded with `seed`
    /// on stream `n_p`; the draw is mirrored to `(j, i)`.
    pub fn generate(n_p: usize, seed: u64) -> Result<Self> {
        if n_p < 2 {
            return Err(param(format!("need at least 2 products, got {n_p}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(n_p as u64);
        let mut entries = alloc::vec![0.0; n_p * n_p];
        for i in 0..n_p {
            for j in i + 1..n_p {
                let v = rng.gen_range(C_MIN..C_MAX);
                entries[i * n_p + j] = v;
                entries[j * n_p + i] = v;
            }
        }
        Ok(CMatrix { n: n_p, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Cannibalization `Σ_{i,j} C_ij x_i x_j` as a QUBO over `n` variables,
    /// scaled by `scale`, with product `i` mapped to variable `offset + i`.
    fn add_block(&self, p: &mut QuboProblem, offset: usize, scale: f64) -> Result<()> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let b = self.get(i, j) + self.get(j, i);
                if b != 0.0 {
                    p.add_quadratic(offset + i, offset + j, scale * b)?;
                }
            }
        }
        Ok(())
    }
}

/// Choose `budget` of `n_p` products minimizing pairwise cannibalization.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleQuarterInstance {
    pub id: String,
    pub c: CMatrix,
    pub budget: usize,
    pub seed: Option<u64>,
}

impl SingleQuarterInstance {
    pub fn new(id: impl Into<String>, c: CMatrix, budget: usize) -> Result<Self> {
        if budget > c.n() {
            return Err(param(format!("budget {budget} exceeds {} products", c.n())));
        }
        Ok(SingleQuarterInstance { id: id.into(), c, budget, seed: None })
    }

    pub fn generate(id: impl Into<String>, n_p: usize, seed: u64, budget: usize) -> Result<Self> {
        let mut inst = Self::new(id, CMatrix::generate(n_p, seed)?, budget)?;
        inst.seed = Some(seed);
        Ok(inst)
    }

    pub fn n_products(&self) -> usize {
        self.c.n()
    }

    /// Base QUBO (`b_ij = C_ij + C_ji`) and the budget constraint `Σ x_i = A`.
    pub fn build(&self) -> Result<(QuboProblem, ConstraintSet)> {
        let n = self.n_products();
        let mut p = QuboProblem::new(n);
        self.c.add_block(&mut p, 0, 1.0)?;
        let mut set = ConstraintSet::new();
        set.push(EqualityConstraint::count(BUDGET_LABEL, 0..n, self.budget as f64)?)?;
        Ok((p, set))
    }
}

/// Two consecutive quarters, `budget` promotions each, every product promoted
/// at most once. Variable `(i, q)` lives at flat index `q·n_p + i`, `q ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQuarterInstance {
    pub id: String,
    pub c: CMatrix,
    pub budget: usize,
    pub lambda: [f64; 2],
    pub seed: Option<u64>,
}

impl TwoQuarterInstance {
    pub fn new(id: impl Into<String>, c: CMatrix, budget: usize, lambda: [f64; 2]) -> Result<Self> {
        if budget > c.n() {
            return Err(param(format!("budget {budget} exceeds {} products", c.n())));
        }
        if !(lambda[0] > 0.0 && lambda[1] > 0.0) {
            return Err(param("seasonal scale factors must be positive"));
        }
        Ok(TwoQuarterInstance { id: id.into(), c, budget, lambda, seed: None })
    }

    pub fn n_products(&self) -> usize {
        self.c.n()
    }

    pub fn num_vars(&self) -> usize {
        2 * self.c.n()
    }

    /// Flat index of product `i` in quarter `q` (0-based).
    pub fn var(&self, i: usize, q: usize) -> usize {
        q * self.c.n() + i
    }

    /// Flat variable indices of quarter `q`.
    pub fn quarter_vars(&self, q: usize) -> core::ops::Range<usize> {
        let n = self.c.n();
        q * n..(q + 1) * n
    }

    pub fn budget_label(q: usize) -> String {
        format!("budget_q{}", q + 1)
    }

    pub fn once_label(i: usize) -> String {
        format!("once_p{i}")
    }

    /// Base QUBO with λ-scaled quarter blocks, plus `n_p + 2` constraints:
    /// the two quarter budgets followed by one overlap constraint per product.
    pub fn build(&self) -> Result<(QuboProblem, ConstraintSet)> {
        let n = self.n_products();
        let mut p = QuboProblem::new(2 * n);
        for q in 0..2 {
            self.c.add_block(&mut p, q * n, self.lambda[q])?;
        }
        let mut set = ConstraintSet::new();
        for q in 0..2 {
            set.push(EqualityConstraint::count(Self::budget_label(q), self.quarter_vars(q), self.budget as f64)?)?;
        }
        for i in 0..n {
            set.push(PairInequalityConstraint::new(Self::once_label(i), self.var(i, 0), self.var(i, 1))?)?;
        }
        Ok((p, set))
    }
}
