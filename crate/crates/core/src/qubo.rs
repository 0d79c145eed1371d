//! QUBO and Ising representations, the coefficient maps between them, and
//! hardware-style normalization of Ising models.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;


use crate::error::{param, Error, Result};

/// An assignment `x ∈ {0,1}^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString { bits }
    }

    pub fn zeros(n: usize) -> Self {
        BitString { bits: alloc::vec![false; n] }
    }

    /// Decodes basis index `index` (bit `i` is `x_i`).
    pub fn from_index(index: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        BitString { bits: (0..n).map(|i| (index >> i) & 1 == 1).collect() }
    }

    /// Parses a string of `0`/`1` characters, `x_0` first.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(param(alloc::format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString::new)
    }

    /// Basis index of this assignment. Panics for more than 64 bits.
    pub fn index(&self) -> u64 {
        assert!(self.bits.len() <= 64, "bitstring too long for a basis index");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Hamming weight `w(x)`.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.bits.len() == n {
            Ok(())
        } else {
            Err(Error::Dimension { expected: n, found: self.bits.len() })
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

fn ordered_pair(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// `f(x) = Σ a_i x_i + Σ_{i<j} b_ij x_i x_j + offset`, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    n: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboProblem {
    pub fn new(n: usize) -> Self {
        QuboProblem { n, linear: BTreeMap::new(), quadratic: BTreeMap::new(), offset: 0.0 }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::Index { index: i, n: self.n })
        }
    }

    /// Adds `value` to `a_i`.
    pub fn add_linear(&mut self, i: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        *self.linear.entry(i).or_insert(0.0) += value;
        Ok(())
    }

    /// Adds `value` to `b_ij`. A diagonal term folds into `a_i` since `x_i² = x_i`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return self.add_linear(i, value);
        }
        *self.quadratic.entry(ordered_pair(i, j)).or_insert(0.0) += value;
        Ok(())
    }

    pub fn add_offset(&mut self, value: f64) {
        self.offset += value;
    }

    pub fn linear(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&ordered_pair(i, j)).copied().unwrap_or(0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear_terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.linear.iter().map(|(&i, &v)| (i, v))
    }

    pub fn quadratic_terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.quadratic.iter().map(|(&k, &v)| (k, v))
    }

    /// Number of stored pair coefficients.
    pub fn num_quadratic_terms(&self) -> usize {
        self.quadratic.len()
    }

    /// Coefficient-wise sum of `other` into `self`.
    pub fn add_problem(&mut self, other: &QuboProblem) -> Result<()> {
        if other.n != self.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        for (&i, &v) in &other.linear {
            *self.linear.entry(i).or_insert(0.0) += v;
        }
        for (&k, &v) in &other.quadratic {
            *self.quadratic.entry(k).or_insert(0.0) += v;
        }
        self.offset += other.offset;
        Ok(())
    }

    pub fn evaluate(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.n)?;
        let bits = x.as_slice();
        let mut value = self.offset;
        for (&i, &a) in &self.linear {
            if bits[i] {
                value += a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if bits[i] && bits[j] {
                value += b;
            }
        }
        Ok(value)
    }

    /// Objective of the basis state `index`; no length check.
    pub fn evaluate_index(&self, index: u64) -> f64 {
        let bit = |i: usize| (index >> i) & 1 == 1;
        let mut value = self.offset;
        for (&i, &a) in &self.linear {
            if bit(i) {
                value += a;
            }
        }
        for (&(i, j), &b) in &self.quadratic {
            if bit(i) && bit(j) {
                value += b;
            }
        }
        value
    }

    /// Ising form under `x_i ↦ (1 - s_i)/2`:
    /// `J_ij = b_ij/4`, `h_i = -a_i/2 - Σ_j b_ij/4`, with the constant
    /// chosen so energies equal objective values exactly.
    pub fn to_ising(&self) -> IsingModel {
        let mut model = IsingModel::new(self.n);
        let mut constant = self.offset;
        for (&i, &a) in &self.linear {
            *model.fields.entry(i).or_insert(0.0) -= a / 2.0;
            constant += a / 2.0;
        }
        for (&(i, j), &b) in &self.quadratic {
            *model.couplings.entry((i, j)).or_insert(0.0) += b / 4.0;
            *model.fields.entry(i).or_insert(0.0) -= b / 4.0;
            *model.fields.entry(j).or_insert(0.0) -= b / 4.0;
            constant += b / 4.0;
        }
        model.constant = constant;
        model
    }

    /// Table of `f` over all `2^n` basis states, in index order.
    pub fn objective_table(&self) -> Vec<f64> {
        self.to_ising().diagonal()
    }
}

/// `H_P = Σ h_i s_i + Σ_{i<j} J_ij s_i s_j + constant`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    n: usize,
    fields: BTreeMap<usize, f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    constant: f64,
}

/// Result of scaling an Ising model into coupling/field bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationReport {
    pub factor: f64,
    pub max_abs_coupling_before: f64,
    pub max_abs_field_before: f64,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        IsingModel { n, fields: BTreeMap::new(), couplings: BTreeMap::new(), constant: 0.0 }
    }

    pub fn num_spins(&self) -> usize {
        self.n
    }

    pub fn add_field(&mut self, i: usize, value: f64) -> Result<()> {
        if i >= self.n {
            return Err(Error::Index { index: i, n: self.n });
        }
        *self.fields.entry(i).or_insert(0.0) += value;
        Ok(())
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i >= self.n || j >= self.n {
            return Err(Error::Index { index: i.max(j), n: self.n });
        }
        if i == j {
            // s_i² = 1
            self.constant += value;
            return Ok(());
        }
        *self.couplings.entry(ordered_pair(i, j)).or_insert(0.0) += value;
        Ok(())
    }

    pub fn set_constant(&mut self, value: f64) {
        self.constant = value;
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields.get(&i).copied().unwrap_or(0.0)
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&ordered_pair(i, j)).copied().unwrap_or(0.0)
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn fields(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.fields.iter().map(|(&i, &v)| (i, v))
    }

    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.couplings.iter().map(|(&k, &v)| (k, v))
    }

    pub fn max_abs_field(&self) -> f64 {
        self.fields.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.couplings.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Energy of assignment `x` with spins `s_i = 1 - 2 x_i`.
    pub fn energy(&self, x: &BitString) -> Result<f64> {
        x.check_len(self.n)?;
        Ok(self.energy_index(x.index()))
    }

    pub fn energy_index(&self, index: u64) -> f64 {
        let spin = |i: usize| if (index >> i) & 1 == 1 { -1.0 } else { 1.0 };
        let mut e = self.constant;
        for (&i, &h) in &self.fields {
            e += h * spin(i);
        }
        for (&(i, j), &jij) in &self.couplings {
            e += jij * spin(i) * spin(j);
        }
        e
    }

    /// Diagonal of `H_P` in the computational basis (length `2^n`).
    pub fn diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n;
        let mut h = alloc::vec![0.0; self.n];
        for (&i, &v) in &self.fields {
            h[i] = v;
        }
        let couplings: Vec<((usize, usize), f64)> = self.couplings().collect();
        let mut diag = Vec::with_capacity(dim);
        for index in 0..dim {
            let spin = |i: usize| if (index >> i) & 1 == 1 { -1.0 } else { 1.0 };
            let mut e = self.constant;
            for (i, &hi) in h.iter().enumerate() {
                e += hi * spin(i);
            }
            for &((i, j), jij) in &couplings {
                e += jij * spin(i) * spin(j);
            }
            diag.push(e);
        }
        diag
    }

    /// Divides `h`, `J` and the constant by the smallest factor bringing
    /// `max|J| ≤ coupling_bound` and `max|h| ≤ field_bound`. Small models are
    /// scaled up. An all-zero model gets factor 1.
    pub fn normalized(
        &self,
        coupling_bound: f64,
        field_bound: f64,
    ) -> Result<(IsingModel, NormalizationReport)> {
        if !(coupling_bound > 0.0) || !(field_bound > 0.0) {
            return Err(param("normalization bounds must be positive"));
        }
        let max_j = self.max_abs_coupling();
        let max_h = self.max_abs_field();
        let mut factor = (max_j / coupling_bound).max(max_h / field_bound);
        if factor == 0.0 {
            factor = 1.0;
        }
        let scaled = IsingModel {
            n: self.n,
            fields: self.fields.iter().map(|(&i, &v)| (i, v / factor)).collect(),
            couplings: self.couplings.iter().map(|(&k, &v)| (k, v / factor)).collect(),
            constant: self.constant / factor,
        };
        Ok((
            scaled,
            NormalizationReport {
                factor,
                max_abs_coupling_before: max_j,
                max_abs_field_before: max_h,
            },
        ))
    }
}
