//! Constraints and their penalty encodings.
//!
//! Equality constraints `Σ μ_i x_i = c` can be penalized quadratically,
//! `α₂ (Σ μ_i x_i − c)²`, or with a linear Ising penalty `α₁ (Σ μ_i x_i − c)`.
//! Pair inequalities `x_i + x_j ≤ 1` are always penalized with `α₂ x_i x_j`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::qubo::{BitString, QuboProblem};
use crate::ENERGY_TOL;

#[derive(Clone, Debug, PartialEq)]
pub struct EqualityConstraint {
    mu: BTreeMap<usize, f64>,
    value: f64,
    label: String,
}

impl EqualityConstraint {
    pub fn new(
        label: impl Into<String>,
        mu: impl IntoIterator<Item = (usize, f64)>,
        value: f64,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (i, m) in mu {
            *coeffs.entry(i).or_insert(0.0) += m;
        }
        coeffs.retain(|_, m| *m != 0.0);
        let label = label.into();
        if coeffs.is_empty() {
            return Err(param(format!("constraint {label:?} has no nonzero coefficient")));
        }
        Ok(EqualityConstraint { mu: coeffs, value, label })
    }

    /// `Σ_{i ∈ vars} x_i = value`.
    pub fn count(
        label: impl Into<String>,
        vars: impl IntoIterator<Item = usize>,
        value: f64,
    ) -> Result<Self> {
        Self::new(label, vars.into_iter().map(|i| (i, 1.0)), value)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mu.iter().map(|(&i, &m)| (i, m))
    }

    pub fn lhs(&self, bits: &[bool]) -> f64 {
        self.mu.iter().filter(|(&i, _)| bits[i]).map(|(_, &m)| m).sum()
    }

    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        (self.lhs(bits) - self.value).abs() < ENERGY_TOL
    }

    fn max_index(&self) -> usize {
        self.mu.keys().next_back().copied().unwrap_or(0)
    }
}

/// `x_i + x_j ≤ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairInequalityConstraint {
    i: usize,
    j: usize,
    label: String,
}

impl PairInequalityConstraint {
    pub fn new(label: impl Into<String>, i: usize, j: usize) -> Result<Self> {
        let label = label.into();
        if i == j {
            return Err(param(format!("pair constraint {label:?} uses the same variable twice")));
        }
        Ok(PairInequalityConstraint { i, j, label })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vars(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        !(bits[self.i] && bits[self.j])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    Equality(EqualityConstraint),
    PairInequality(PairInequalityConstraint),
}

impl Constraint {
    pub fn label(&self) -> &str {
        match self {
            Constraint::Equality(c) => c.label(),
            Constraint::PairInequality(c) => c.label(),
        }
    }

    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        match self {
            Constraint::Equality(c) => c.is_satisfied(bits),
            Constraint::PairInequality(c) => c.is_satisfied(bits),
        }
    }

    /// `(variable, coefficient)` pairs of the constraint's left-hand side.
    pub fn terms(&self) -> Vec<(usize, f64)> {
        match self {
            Constraint::Equality(c) => c.coefficients().collect(),
            Constraint::PairInequality(c) => alloc::vec![(c.i, 1.0), (c.j, 1.0)],
        }
    }

    pub(crate) fn bound(&self) -> (f64, bool) {
        match self {
            Constraint::Equality(c) => (c.value, true),
            Constraint::PairInequality(_) => (1.0, false),
        }
    }

    fn max_index(&self) -> usize {
        match self {
            Constraint::Equality(c) => c.max_index(),
            Constraint::PairInequality(c) => c.i.max(c.j),
        }
    }
}

impl From<EqualityConstraint> for Constraint {
    fn from(c: EqualityConstraint) -> Self {
        Constraint::Equality(c)
    }
}

impl From<PairInequalityConstraint> for Constraint {
    fn from(c: PairInequalityConstraint) -> Self {
        Constraint::PairInequality(c)
    }
}

/// An ordered collection of constraints with unique labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, c: impl Into<Constraint>) -> Result<()> {
        let c = c.into();
        if self.get(c.label()).is_some() {
            return Err(Error::Configuration(format!("duplicate constraint label {:?}", c.label())));
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.label() == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn equalities(&self) -> impl Iterator<Item = &EqualityConstraint> {
        self.constraints.iter().filter_map(|c| match c {
            Constraint::Equality(e) => Some(e),
            _ => None,
        })
    }

    pub fn inequalities(&self) -> impl Iterator<Item = &PairInequalityConstraint> {
        self.constraints.iter().filter_map(|c| match c {
            Constraint::PairInequality(e) => Some(e),
            _ => None,
        })
    }

    /// Constraint set restricted to labels accepted by `keep`.
    pub fn filtered(&self, mut keep: impl FnMut(&Constraint) -> bool) -> ConstraintSet {
        ConstraintSet { constraints: self.constraints.iter().filter(|c| keep(c)).cloned().collect() }
    }

    pub fn is_feasible(&self, x: &BitString) -> bool {
        self.constraints.iter().all(|c| c.is_satisfied(x.as_slice()))
    }

    /// Labels of constraints violated by `x`, in insertion order.
    pub fn violated_labels(&self, x: &BitString) -> Vec<String> {
        self.constraints
            .iter()
            .filter(|c| !c.is_satisfied(x.as_slice()))
            .map(|c| String::from(c.label()))
            .collect()
    }

    pub(crate) fn check_dimension(&self, n: usize) -> Result<()> {
        for c in &self.constraints {
            let max = c.max_index();
            if max >= n {
                return Err(Error::Index { index: max, n });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Penalty {
    /// `α₂ (Σμx − c)²` for equalities, `α₂ x_i x_j` for pair inequalities.
    Quadratic(f64),
    /// `α₁ (Σμx − c)`; equalities only. The sign of `α₁` is unrestricted.
    Linear(f64),
}

/// Per-constraint penalty choice, keyed by constraint label.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PenaltyScheme {
    penalties: BTreeMap<String, Penalty>,
}

impl PenaltyScheme {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: impl Into<String>, penalty: Penalty) -> Self {
        self.penalties.insert(label.into(), penalty);
        self
    }

    pub fn set(&mut self, label: impl Into<String>, penalty: Penalty) {
        self.penalties.insert(label.into(), penalty);
    }

    /// Quadratic penalty of strength `alpha2` on every constraint in `set`.
    pub fn all_quadratic(set: &ConstraintSet, alpha2: f64) -> Self {
        PenaltyScheme {
            penalties: set.iter().map(|c| (String::from(c.label()), Penalty::Quadratic(alpha2))).collect(),
        }
    }

    pub fn get(&self, label: &str) -> Option<Penalty> {
        self.penalties.get(label).copied()
    }
}

/// Expansion of `α₂ (Σ μ_i x_i − c)²`: linear `α₂ μ_i (μ_i − 2c)`, pair
/// `2 α₂ μ_i μ_j`, offset `α₂ c²`.
pub fn quadratic_equality_penalty(
    n: usize,
    con: &EqualityConstraint,
    alpha2: f64,
) -> Result<QuboProblem> {
    if !(alpha2 > 0.0) {
        return Err(param(format!("quadratic strength must be positive, got {alpha2}")));
    }
    let mut p = QuboProblem::new(n);
    let c = con.value;
    let terms: Vec<(usize, f64)> = con.coefficients().collect();
    for (k, &(i, mi)) in terms.iter().enumerate() {
        p.add_linear(i, alpha2 * mi * (mi - 2.0 * c))?;
        for &(j, mj) in &terms[k + 1..] {
            p.add_quadratic(i, j, 2.0 * alpha2 * mi * mj)?;
        }
    }
    p.add_offset(alpha2 * c * c);
    Ok(p)
}

/// `α₁ (Σ μ_i x_i − c)`: linear `α₁ μ_i`, offset `−α₁ c`, no pair terms.
pub fn linear_equality_penalty(n: usize, con: &EqualityConstraint, alpha1: f64) -> Result<QuboProblem> {
    let mut p = QuboProblem::new(n);
    if alpha1 == 0.0 {
        return Ok(p);
    }
    for (i, mi) in con.coefficients() {
        p.add_linear(i, alpha1 * mi)?;
    }
    p.add_offset(-alpha1 * con.value);
    Ok(p)
}

/// `α₂ x_i x_j`.
pub fn quadratic_inequality_penalty(
    n: usize,
    con: &PairInequalityConstraint,
    alpha2: f64,
) -> Result<QuboProblem> {
    if !(alpha2 > 0.0) {
        return Err(param(format!("quadratic strength must be positive, got {alpha2}")));
    }
    let mut p = QuboProblem::new(n);
    p.add_quadratic(con.i, con.j, alpha2)?;
    Ok(p)
}

/// Penalty QUBO for one constraint under `penalty`.
pub fn constraint_penalty(n: usize, con: &Constraint, penalty: Penalty) -> Result<QuboProblem> {
    match (con, penalty) {
        (Constraint::Equality(c), Penalty::Quadratic(a)) => quadratic_equality_penalty(n, c, a),
        (Constraint::Equality(c), Penalty::Linear(a)) => linear_equality_penalty(n, c, a),
        (Constraint::PairInequality(c), Penalty::Quadratic(a)) => quadratic_inequality_penalty(n, c, a),
        (Constraint::PairInequality(c), Penalty::Linear(_)) => Err(Error::Configuration(format!(
            "linear penalties are not supported for inequality constraint {:?}",
            c.label
        ))),
    }
}

/// `base` plus the penalty of every constraint under `scheme`.
pub fn apply_scheme(
    base: &QuboProblem,
    constraints: &ConstraintSet,
    scheme: &PenaltyScheme,
) -> Result<QuboProblem> {
    let n = base.num_vars();
    constraints.check_dimension(n)?;
    let mut out = base.clone();
    for con in constraints.iter() {
        let penalty = scheme.get(con.label()).ok_or_else(|| {
            Error::Configuration(format!("no penalty given for constraint {:?}", con.label()))
        })?;
        out.add_problem(&constraint_penalty(n, con, penalty)?)?;
    }
    Ok(out)
}
