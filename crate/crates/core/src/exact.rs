//! Exhaustive oracle over all `2^n` assignments.
//!
//! Enumeration walks the reflected Gray code, so each step flips one variable
//! and updates the objective in `O(deg)` from a maintained local-field vector.
//! Minimum candidates found on the walk are re-evaluated directly before
//! being reported, which keeps accumulated rounding out of the results.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::penalty::ConstraintSet;
use crate::qubo::{BitString, QuboProblem};
use crate::ENERGY_TOL;

/// Largest `n` accepted by the enumeration routines.
pub const MAX_ENUMERATION_VARS: usize = 26;

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_VARS {
        Err(Error::Capacity { n, max: MAX_ENUMERATION_VARS })
    } else {
        Ok(())
    }
}

/// Calls `visit(index, flipped, value)` for every basis state in Gray order.
/// `flipped` is `None` for the first (all-zeros) state.
pub(crate) fn gray_walk(p: &QuboProblem, mut visit: impl FnMut(u64, Option<usize>, f64)) {
    let n = p.num_vars();
    let mut neighbours: Vec<Vec<(usize, f64)>> = alloc::vec![Vec::new(); n];
    for ((i, j), b) in p.quadratic_terms() {
        neighbours[i].push((j, b));
        neighbours[j].push((i, b));
    }
    let mut field: Vec<f64> = (0..n).map(|i| p.linear(i)).collect();
    let mut bits = alloc::vec![false; n];
    let mut value = p.offset();
    let mut index = 0u64;
    visit(index, None, value);
    let total = 1u64 << n;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        let sign = if bits[k] { -1.0 } else { 1.0 };
        value += sign * field[k];
        bits[k] = !bits[k];
        for &(j, b) in &neighbours[k] {
            field[j] += sign * b;
        }
        index ^= 1 << k;
        visit(index, Some(k), value);
    }
}

/// Incrementally tracks how many constraints the current Gray-walk state violates.
pub(crate) struct FeasibilityTracker {
    lhs: Vec<f64>,
    bound: Vec<(f64, bool)>,
    by_var: Vec<Vec<(usize, f64)>>,
    satisfied: Vec<bool>,
    violated: usize,
}

impl FeasibilityTracker {
    pub(crate) fn new(n: usize, constraints: &ConstraintSet) -> Self {
        let mut by_var = alloc::vec![Vec::new(); n];
        let mut bound = Vec::new();
        for (c, con) in constraints.iter().enumerate() {
            for (i, m) in con.terms() {
                by_var[i].push((c, m));
            }
            bound.push(con.bound());
        }
        let lhs = alloc::vec![0.0; bound.len()];
        let satisfied: Vec<bool> = bound.iter().map(|&(b, eq)| Self::check(0.0, b, eq)).collect();
        let violated = satisfied.iter().filter(|&&s| !s).count();
        FeasibilityTracker { lhs, bound, by_var, satisfied, violated }
    }

    fn check(lhs: f64, bound: f64, equality: bool) -> bool {
        if equality {
            (lhs - bound).abs() < ENERGY_TOL
        } else {
            lhs <= bound + ENERGY_TOL
        }
    }

    pub(crate) fn flip(&mut self, var: usize, now_set: bool) {
        let sign = if now_set { 1.0 } else { -1.0 };
        for &(c, m) in &self.by_var[var] {
            self.lhs[c] += sign * m;
            let (b, eq) = self.bound[c];
            let ok = Self::check(self.lhs[c], b, eq);
            if ok != self.satisfied[c] {
                self.satisfied[c] = ok;
                if ok {
                    self.violated -= 1;
                } else {
                    self.violated += 1;
                }
            }
        }
    }

    pub(crate) fn feasible(&self) -> bool {
        self.violated == 0
    }
}

/// Basis states whose value lies within `ENERGY_TOL` of the running minimum.
#[derive(Clone, Debug)]
pub(crate) struct MinSet {
    best: f64,
    items: Vec<(u64, f64, bool)>,
}

impl MinSet {
    pub(crate) fn new() -> Self {
        MinSet { best: f64::INFINITY, items: Vec::new() }
    }

    pub(crate) fn offer(&mut self, index: u64, value: f64, flag: bool) {
        if value <= self.best + ENERGY_TOL {
            if value < self.best {
                self.best = value;
                let cut = value + ENERGY_TOL;
                self.items.retain(|&(_, v, _)| v <= cut);
            }
            self.items.push((index, value, flag));
        }
    }

    /// Replaces walk values by direct evaluations and re-filters.
    pub(crate) fn refine(&mut self, p: &QuboProblem) {
        for item in &mut self.items {
            item.1 = p.evaluate_index(item.0);
        }
        self.best = self.items.iter().map(|&(_, v, _)| v).fold(f64::INFINITY, f64::min);
        let cut = self.best + ENERGY_TOL;
        self.items.retain(|&(_, v, _)| v <= cut);
        self.items.sort_by_key(|&(k, _, _)| k);
    }

    pub(crate) fn best(&self) -> f64 {
        self.best
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub(crate) fn indices(&self) -> impl Iterator<Item = u64> + '_ {
        self.items.iter().map(|&(k, _, _)| k)
    }

    pub(crate) fn all_flagged(&self) -> bool {
        self.items.iter().all(|&(_, _, f)| f)
    }
}

/// Bitset over basis indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSet {
    words: Vec<u64>,
    len: u64,
    count: u64,
}

impl BasisSet {
    fn new(dim: u64) -> Self {
        BasisSet { words: alloc::vec![0; dim.div_ceil(64) as usize], len: dim, count: 0 }
    }

    fn insert(&mut self, k: u64) {
        let w = &mut self.words[(k / 64) as usize];
        let bit = 1u64 << (k % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.count += 1;
        }
    }

    pub fn contains(&self, k: u64) -> bool {
        k < self.len && self.words[(k / 64) as usize] >> (k % 64) & 1 == 1
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.len).filter(move |&k| self.contains(k))
    }
}

/// Exact ground-state and constrained-optimum data for one problem.
#[derive(Clone, Debug)]
pub struct ExactSummary {
    pub n: usize,
    pub ground_energy: f64,
    /// All minimizers of the objective, ignoring constraints.
    pub ground_states: Vec<BitString>,
    /// Minimum objective over feasible assignments; `None` if none exist.
    pub optimal_feasible_energy: Option<f64>,
    /// `X*`: all feasible minimizers.
    pub optimal_feasible: Vec<BitString>,
    /// `X̃`: every feasible assignment.
    pub feasible: BasisSet,
}

impl ExactSummary {
    pub fn feasible_count(&self) -> u64 {
        self.feasible.count()
    }

    pub fn optimal_indices(&self) -> Vec<u64> {
        self.optimal_feasible.iter().map(BitString::index).collect()
    }

    pub fn ground_indices(&self) -> Vec<u64> {
        self.ground_states.iter().map(BitString::index).collect()
    }

    /// `|X*| / 2^n`, the success probability of uniform guessing.
    pub fn random_guess_success(&self) -> f64 {
        self.optimal_feasible.len() as f64 / (1u64 << self.n) as f64
    }

    /// `|X̃| / 2^n`.
    pub fn random_guess_feasible(&self) -> f64 {
        self.feasible.count() as f64 / (1u64 << self.n) as f64
    }
}

/// Enumerates every assignment of `p`, reporting unconstrained ground states
/// and the optimum over assignments satisfying `constraints`.
pub fn brute_force(p: &QuboProblem, constraints: &ConstraintSet) -> Result<ExactSummary> {
    let n = p.num_vars();
    check_capacity(n)?;
    constraints.check_dimension(n)?;
    let mut tracker = FeasibilityTracker::new(n, constraints);
    let mut feasible = BasisSet::new(1u64 << n);
    let mut ground = MinSet::new();
    let mut optimal = MinSet::new();
    gray_walk(p, |index, flipped, value| {
        if let Some(k) = flipped {
            tracker.flip(k, index >> k & 1 == 1);
        }
        ground.offer(index, value, true);
        if tracker.feasible() {
            feasible.insert(index);
            optimal.offer(index, value, true);
        }
    });
    ground.refine(p);
    optimal.refine(p);
    let to_bits = |set: &MinSet| set.indices().map(|k| BitString::from_index(k, n)).collect::<Vec<_>>();
    Ok(ExactSummary {
        n,
        ground_energy: ground.best(),
        ground_states: to_bits(&ground),
        optimal_feasible_energy: (!optimal.is_empty()).then(|| optimal.best()),
        optimal_feasible: to_bits(&optimal),
        feasible,
    })
}

/// Minimum objective among assignments of one Hamming weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMinimum {
    pub weight: usize,
    pub value: f64,
    pub argmin: BitString,
}

/// `min{ f(x) : w(x) = w }` for every `w ∈ 0..=n`, indexed by weight.
pub fn min_objective_by_weight(p: &QuboProblem) -> Result<Vec<WeightMinimum>> {
    let n = p.num_vars();
    let profile = GroupedProfile::compute(p, &[(0..n).collect()], &ConstraintSet::new())?;
    Ok(profile
        .cells()
        .iter()
        .map(|cell| WeightMinimum {
            weight: cell.weights[0],
            value: cell.min,
            argmin: BitString::from_index(cell.minimizers[0], n),
        })
        .collect())
}

/// Labels of the constraints violated by `x`; empty iff `x` is feasible.
pub fn feasibility_report(x: &BitString, constraints: &ConstraintSet) -> Result<Vec<String>> {
    constraints.check_dimension(x.len())?;
    Ok(constraints.violated_labels(x))
}

/// One cell of a [`GroupedProfile`]: the minimum objective over assignments
/// with the given per-group Hamming weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileCell {
    pub weights: Vec<usize>,
    pub min: f64,
    /// Basis indices of every minimizer (within tolerance), ascending.
    pub minimizers: Vec<u64>,
    /// Whether every minimizer satisfies the profile's constraint set.
    pub all_feasible: bool,
}

/// Minimum objective for every combination of Hamming weights over disjoint
/// variable groups, from a single enumeration.
///
/// Adding `Σ_g α_g (w_g − c_g)` or any other function of the group weights to
/// the objective shifts whole cells, so ground states of such penalized
/// problems can be read off the profile without re-enumerating.
#[derive(Clone, Debug)]
pub struct GroupedProfile {
    n: usize,
    cells: Vec<ProfileCell>,
    radix: Vec<usize>,
}

impl GroupedProfile {
    pub fn compute(p: &QuboProblem, groups: &[Vec<usize>], constraints: &ConstraintSet) -> Result<Self> {
        let n = p.num_vars();
        check_capacity(n)?;
        constraints.check_dimension(n)?;
        let mut group_of = alloc::vec![usize::MAX; n];
        for (g, vars) in groups.iter().enumerate() {
            for &v in vars {
                if v >= n {
                    return Err(Error::Index { index: v, n });
                }
                if group_of[v] != usize::MAX {
                    return Err(Error::Parameter(alloc::format!("variable {v} appears in two groups")));
                }
                group_of[v] = g;
            }
        }
        let radix: Vec<usize> = groups.iter().map(|g| g.len() + 1).collect();
        let mut stride = alloc::vec![1usize; groups.len()];
        for g in 1..groups.len() {
            stride[g] = stride[g - 1] * radix[g - 1];
        }
        let total: usize = radix.iter().product();
        let mut sets = alloc::vec![MinSet::new(); total];
        let mut tracker = FeasibilityTracker::new(n, constraints);
        let mut key = 0usize;
        gray_walk(p, |index, flipped, value| {
            if let Some(k) = flipped {
                let set = index >> k & 1 == 1;
                tracker.flip(k, set);
                let g = group_of[k];
                if g != usize::MAX {
                    if set {
                        key += stride[g];
                    } else {
                        key -= stride[g];
                    }
                }
            }
            sets[key].offer(index, value, tracker.feasible());
        });
        let mut cells = Vec::with_capacity(total);
        for (k, mut set) in sets.into_iter().enumerate() {
            let weights: Vec<usize> = (0..groups.len()).map(|g| k / stride[g] % radix[g]).collect();
            if set.is_empty() {
                continue;
            }
            set.refine(p);
            cells.push(ProfileCell {
                weights,
                min: set.best(),
                minimizers: set.indices().collect(),
                all_feasible: set.all_flagged(),
            });
        }
        Ok(GroupedProfile { n, cells, radix })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[ProfileCell] {
        &self.cells
    }

    pub fn num_groups(&self) -> usize {
        self.radix.len()
    }

    pub fn cell(&self, weights: &[usize]) -> Option<&ProfileCell> {
        self.cells.iter().find(|c| c.weights == weights)
    }

    /// Cells minimizing `min + shift(weights)`, within `ENERGY_TOL`.
    pub fn minimizing_cells(&self, mut shift: impl FnMut(&[usize]) -> f64) -> (f64, Vec<&ProfileCell>) {
        let values: Vec<f64> = self.cells.iter().map(|c| c.min + shift(&c.weights)).collect();
        let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let cells = self
            .cells
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v <= best + ENERGY_TOL)
            .map(|(c, _)| c)
            .collect();
        (best, cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CMatrix, SingleQuarterInstance, TwoQuarterInstance};
    use crate::penalty::{apply_scheme, EqualityConstraint, PenaltyScheme};

    fn naive_min(p: &QuboProblem, mut keep: impl FnMut(&BitString) -> bool) -> (f64, Vec<u64>) {
        let n = p.num_vars();
        let mut best = f64::INFINITY;
        let mut vals = Vec::new();
        for k in 0..(1u64 << n) {
            let x = BitString::from_index(k, n);
            if keep(&x) {
                let v = p.evaluate(&x).unwrap();
                best = best.min(v);
                vals.push((k, v));
            }
        }
        let arg = vals.into_iter().filter(|&(_, v)| v <= best + ENERGY_TOL).map(|(k, _)| k).collect();
        (best, arg)
    }

    fn four_product() -> SingleQuarterInstance {
        let rows = [
            alloc::vec![0.0, 0.3, 0.8, 0.5],
            alloc::vec![0.3, 0.0, 0.2, 0.9],
            alloc::vec![0.8, 0.2, 0.0, 0.4],
            alloc::vec![0.5, 0.9, 0.4, 0.0],
        ];
        SingleQuarterInstance::new("4_hand", CMatrix::from_rows(&rows).unwrap(), 2).unwrap()
    }

    #[test]
    fn gray_walk_visits_every_state_with_correct_value() {
        let (p, _) = SingleQuarterInstance::generate("7_1", 7, 1, 3).unwrap().build().unwrap();
        let mut seen = alloc::vec![false; 128];
        gray_walk(&p, |k, _, v| {
            assert!(!seen[k as usize]);
            seen[k as usize] = true;
            assert!((v - p.evaluate_index(k)).abs() < 1e-12);
        });
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn zero_problem_all_states_are_ground() {
        let s = brute_force(&QuboProblem::new(4), &ConstraintSet::new()).unwrap();
        assert_eq!(s.ground_energy, 0.0);
        assert_eq!(s.ground_states.len(), 16);
        assert_eq!(s.feasible_count(), 16);
    }

    #[test]
    fn four_product_optimum_over_weight_two() {
        let inst = four_product();
        let (p, set) = inst.build().unwrap();
        let s = brute_force(&p, &set).unwrap();
        // the six weight-2 pair costs are 2·C_ij; the smallest is C_12 = 0.2
        assert_eq!(s.feasible_count(), 6);
        assert_eq!(s.optimal_feasible, alloc::vec![BitString::parse("0110").unwrap()]);
        assert!((s.optimal_feasible_energy.unwrap() - 0.4).abs() < 1e-12);
        let (best, arg) = naive_min(&p, |x| x.weight() == 2);
        assert_eq!(best, s.optimal_feasible_energy.unwrap());
        assert_eq!(arg, s.optimal_indices());
    }

    #[test]
    fn large_quadratic_strength_ground_states_are_optimal() {
        let inst = SingleQuarterInstance::generate("8_3", 8, 3, 3).unwrap();
        let (base, set) = inst.build().unwrap();
        let constrained = brute_force(&base, &set).unwrap();
        let penalized = apply_scheme(&base, &set, &PenaltyScheme::all_quadratic(&set, 50.0)).unwrap();
        let s = brute_force(&penalized, &set).unwrap();
        assert_eq!(s.ground_indices(), constrained.optimal_indices());
    }

    #[test]
    fn capacity_error_above_bound() {
        let p = QuboProblem::new(MAX_ENUMERATION_VARS + 1);
        assert!(matches!(brute_force(&p, &ConstraintSet::new()), Err(Error::Capacity { .. })));
    }

    #[test]
    fn weight_profile_matches_per_weight_enumeration() {
        let (p, _) = SingleQuarterInstance::generate("6_0", 6, 0, 3).unwrap().build().unwrap();
        let profile = min_objective_by_weight(&p).unwrap();
        assert_eq!(profile.len(), 7);
        assert_eq!(profile[0].value, 0.0);
        // second route: iterate the combinations of each size directly
        for (w, m) in profile.iter().enumerate() {
            let mut best = f64::INFINITY;
            for k in 0..64u64 {
                if k.count_ones() as usize == w {
                    best = best.min(p.evaluate_index(k));
                }
            }
            assert_eq!(m.weight, w);
            assert!((m.value - best).abs() < 1e-12);
            assert_eq!(m.argmin.weight(), w);
        }
        for pair in profile.windows(2) {
            assert!(pair[1].value >= pair[0].value);
        }
    }

    #[test]
    fn profile_minimum_equals_ground_energy() {
        let mut p = QuboProblem::new(6);
        let coeffs = [0.4, -1.2, 0.3, 0.9, -0.5, 0.1];
        for (i, &a) in coeffs.iter().enumerate() {
            p.add_linear(i, a).unwrap();
            p.add_quadratic(i, (i + 2) % 6, a * 0.7 - 0.2).unwrap();
        }
        let profile = min_objective_by_weight(&p).unwrap();
        let ground = brute_force(&p, &ConstraintSet::new()).unwrap().ground_energy;
        let pmin = profile.iter().map(|w| w.value).fold(f64::INFINITY, f64::min);
        assert!((pmin - ground).abs() < 1e-12);
    }

    #[test]
    fn feasibility_report_labels() {
        let c = CMatrix::generate(8, 0).unwrap();
        let inst = TwoQuarterInstance::new("8_0", c, 3, [1.5, 1.0]).unwrap();
        let (_, set) = inst.build().unwrap();
        let ok = BitString::parse("1110000000011100").unwrap();
        assert!(feasibility_report(&ok, &set).unwrap().is_empty());
        let too_many = BitString::parse("1111000000001110").unwrap();
        assert_eq!(feasibility_report(&too_many, &set).unwrap(), alloc::vec![String::from("budget_q1")]);
        // product 3 in both quarters, budgets intact
        let overlap = BitString::parse("1101000000011100").unwrap();
        assert_eq!(feasibility_report(&overlap, &set).unwrap(), alloc::vec![String::from("once_p3")]);
    }

    #[test]
    fn feasibility_report_dimension_error() {
        let mut set = ConstraintSet::new();
        set.push(EqualityConstraint::count("c", 0..4, 2.0).unwrap()).unwrap();
        assert!(feasibility_report(&BitString::zeros(3), &set).is_err());
    }

    #[test]
    fn grouped_profile_two_groups_matches_naive() {
        let c = CMatrix::generate(4, 5).unwrap();
        let inst = TwoQuarterInstance::new("4_5", c, 2, [1.5, 1.0]).unwrap();
        let (p, set) = inst.build().unwrap();
        let ineq = set.filtered(|c| matches!(c, crate::penalty::Constraint::PairInequality(_)));
        let groups = [inst.quarter_vars(0).collect::<Vec<_>>(), inst.quarter_vars(1).collect()];
        let prof = GroupedProfile::compute(&p, &groups, &ineq).unwrap();
        assert_eq!(prof.cells().len(), 25);
        for cell in prof.cells() {
            let (best, arg) = naive_min(&p, |x| {
                let w1 = x.as_slice()[..4].iter().filter(|&&b| b).count();
                let w2 = x.as_slice()[4..].iter().filter(|&&b| b).count();
                w1 == cell.weights[0] && w2 == cell.weights[1]
            });
            assert!((cell.min - best).abs() < 1e-12);
            assert_eq!(cell.minimizers, arg);
            let feas = arg.iter().all(|&k| ineq.is_feasible(&BitString::from_index(k, 8)));
            assert_eq!(cell.all_feasible, feas);
        }
    }
}
