//! Searching for linear penalty strengths that implement equality constraints.
//!
//! A linear penalty `α₁ (w − A)` only shifts assignments by a function of
//! their Hamming weight, so the ground state of the penalized problem is fixed
//! by the per-weight minimum profile. The landscapes below enumerate the base
//! problem once and answer every `α₁` query from that profile; the direct
//! brute-force routes ([`ground_weight`], [`two_quarter_ground`]) recompute
//! from scratch and serve as the reference.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;

use crate::error::{param, Result};
use crate::exact::{brute_force, GroupedProfile, ProfileCell};
use crate::instance::{SingleQuarterInstance, TwoQuarterInstance};
use crate::penalty::{apply_scheme, Constraint, ConstraintSet, Penalty, PenaltyScheme};
use crate::qubo::BitString;

/// Default search precision on `α₁`.
pub const DEFAULT_PRECISION: f64 = 1e-5;
/// First probe of the doubling phase.
pub const DOUBLING_START: f64 = -1.0;
/// Probes beyond this magnitude are treated as "unbounded".
const ALPHA_LIMIT: f64 = 1e12;

/// Sorted, distinct Hamming weights of a (possibly degenerate) ground state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSet(Vec<usize>);

impl WeightSet {
    pub fn from_weights(weights: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = weights.into_iter().collect();
        WeightSet(set.into_iter().collect())
    }

    /// The weight when the ground state is not split across weights.
    pub fn single(&self) -> Option<usize> {
        match self.0.as_slice() {
            [w] => Some(*w),
            _ => None,
        }
    }

    pub fn min(&self) -> usize {
        self.0[0]
    }

    pub fn max(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn is_boundary(&self) -> bool {
        self.0.len() > 1
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// Outcome of one oracle call, relative to a target weight.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe {
    /// Some ground state has fewer ones than the target: raise the weight by lowering `α₁`.
    TooFew,
    /// Ground states have more ones than the target.
    TooMany,
    /// Every ground state has the target weight. `violations` lists any
    /// other constraint labels those ground states break.
    AtTarget { violations: Vec<String> },
}

impl Probe {
    fn classify(weights: &WeightSet, target: usize) -> Probe {
        if weights.min() == target && weights.max() == target {
            Probe::AtTarget { violations: Vec::new() }
        } else if weights.min() < target {
            Probe::TooFew
        } else {
            Probe::TooMany
        }
    }
}

/// Range of `α₁` implementing a target weight. `lo` and `hi` are the
/// innermost probed values that still gave the target, so every `α₁` strictly
/// between them does too. Weight grows as `α₁` decreases.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaInterval {
    pub lo: f64,
    pub hi: f64,
    pub target_weight: usize,
    pub found: bool,
    /// Total oracle calls.
    pub oracle_calls: usize,
    /// Oracle calls spent bracketing the window before any bisection.
    pub doubling_calls: usize,
    /// Other constraints violated by target-weight ground states.
    pub violations: Vec<String>,
}

impl AlphaInterval {
    /// Uniform draw from the interval. An unbounded side is clamped one unit
    /// (or `|finite end|`, if larger) beyond the finite end.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        if !self.found {
            return None;
        }
        let (lo, hi) = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (self.lo, self.hi),
            (true, false) => (self.lo, self.lo + self.lo.abs().max(1.0)),
            (false, true) => (self.hi - self.hi.abs().max(1.0), self.hi),
            (false, false) => (-1.0, 1.0),
        };
        if hi > lo {
            Some(rng.gen_range(lo..hi))
        } else {
            Some(lo)
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn is_at(p: &Probe) -> bool {
    matches!(p, Probe::AtTarget { .. })
}

/// Doubling-then-bisection search for the `α₁` window giving `target`.
///
/// Starts at `α₁ = −1` and doubles while the weight is too low; if the
/// start already overshoots, probes `1, 2, 4, …` instead. The window is then
/// located by bisection and both of its edges are refined to `precision`.
pub fn search_window(
    target: usize,
    precision: f64,
    mut oracle: impl FnMut(f64) -> Result<Probe>,
) -> Result<AlphaInterval> {
    if !(precision > 0.0) {
        return Err(param("search precision must be positive"));
    }
    let calls = core::cell::Cell::new(0usize);
    let mut eval = |a: f64| {
        calls.set(calls.get() + 1);
        oracle(a)
    };
    // `few`: smallest α seen with too few ones; `many`: largest with too many.
    let mut few: Option<f64> = None;
    let mut many: Option<f64> = None;
    let mut at_point: Option<(f64, Vec<String>)> = None;
    fn record(
        a: f64,
        p: Probe,
        few: &mut Option<f64>,
        many: &mut Option<f64>,
        at: &mut Option<(f64, Vec<String>)>,
    ) {
        match p {
            Probe::TooFew => *few = Some(few.map_or(a, |f| f.min(a))),
            Probe::TooMany => *many = Some(many.map_or(a, |m| m.max(a))),
            Probe::AtTarget { violations } => {
                if at.is_none() {
                    *at = Some((a, violations));
                }
            }
        }
    }

    let start = eval(DOUBLING_START)?;
    let start_few = start == Probe::TooFew;
    record(DOUBLING_START, start, &mut few, &mut many, &mut at_point);
    if start_few {
        let mut a = DOUBLING_START;
        loop {
            a *= 2.0;
            if a.abs() > ALPHA_LIMIT {
                break;
            }
            let p = eval(a)?;
            let done = p != Probe::TooFew;
            record(a, p, &mut few, &mut many, &mut at_point);
            if done {
                break;
            }
        }
    } else {
        let mut b = 1.0;
        while b <= ALPHA_LIMIT {
            let p = eval(b)?;
            let done = p == Probe::TooFew;
            record(b, p, &mut few, &mut many, &mut at_point);
            if done {
                break;
            }
            b *= 2.0;
        }
    }
    let doubling_calls = calls.get();

    if at_point.is_none() {
        if let (Some(mut f), Some(mut m)) = (few, many) {
            while (f - m).abs() > precision {
                let mid = 0.5 * (f + m);
                match eval(mid)? {
                    Probe::TooFew => f = mid,
                    Probe::TooMany => m = mid,
                    Probe::AtTarget { violations } => {
                        at_point = Some((mid, violations));
                        break;
                    }
                }
            }
            few = Some(f);
            many = Some(m);
        }
    }

    let Some((inside, violations)) = at_point else {
        let (lo, hi) = (many.unwrap_or(f64::NEG_INFINITY), few.unwrap_or(f64::INFINITY));
        return Ok(AlphaInterval {
            lo,
            hi,
            target_weight: target,
            found: false,
            oracle_calls: calls.get(),
            doubling_calls,
            violations: Vec::new(),
        });
    };

    // upper edge: between `inside` and the nearest too-few probe above it
    let hi = match few.filter(|&f| f > inside) {
        None => f64::INFINITY,
        Some(mut outer) => {
            let mut inner = inside;
            while outer - inner > precision {
                let mid = 0.5 * (inner + outer);
                if is_at(&eval(mid)?) {
                    inner = mid;
                } else {
                    outer = mid;
                }
            }
            inner
        }
    };

    // lower edge: find a too-many probe below `inside` if none is known yet
    let mut outer_lo = many.filter(|&m| m < inside);
    let mut inner_lo = inside;
    if outer_lo.is_none() {
        let mut step = inside.abs().max(1.0);
        loop {
            let a = inside - step;
            if a.abs() > ALPHA_LIMIT {
                break;
            }
            if is_at(&eval(a)?) {
                inner_lo = a;
            } else {
                outer_lo = Some(a);
                break;
            }
            step *= 2.0;
        }
    }
    let lo = match outer_lo {
        None => f64::NEG_INFINITY,
        Some(mut outer) => {
            while inner_lo - outer > precision {
                let mid = 0.5 * (inner_lo + outer);
                if is_at(&eval(mid)?) {
                    inner_lo = mid;
                } else {
                    outer = mid;
                }
            }
            inner_lo
        }
    };

    Ok(AlphaInterval {
        lo,
        hi,
        target_weight: target,
        found: violations.is_empty(),
        oracle_calls: calls.get(),
        doubling_calls,
        violations,
    })
}

fn linear_scheme(set: &ConstraintSet, alpha1: f64) -> PenaltyScheme {
    PenaltyScheme::new().with(
        set.equalities().next().map(|c| String::from(c.label())).unwrap_or_default(),
        Penalty::Linear(alpha1),
    )
}

/// Hamming weights of the brute-force ground states of the single-quarter
/// problem with linear penalty `α₁` on its budget constraint.
pub fn ground_weight(inst: &SingleQuarterInstance, alpha1: f64) -> Result<WeightSet> {
    let (base, set) = inst.build()?;
    let penalized = apply_scheme(&base, &set, &linear_scheme(&set, alpha1))?;
    let summary = brute_force(&penalized, &ConstraintSet::new())?;
    Ok(WeightSet::from_weights(summary.ground_states.iter().map(BitString::weight)))
}

/// Per-weight minimum profile of a single-quarter instance.
#[derive(Clone, Debug)]
pub struct SingleQuarterLandscape {
    minima: Vec<f64>,
}

impl SingleQuarterLandscape {
    pub fn new(inst: &SingleQuarterInstance) -> Result<Self> {
        let (base, _) = inst.build()?;
        let n = base.num_vars();
        let profile = GroupedProfile::compute(&base, &[(0..n).collect()], &ConstraintSet::new())?;
        let minima = profile.cells().iter().map(|c| c.min).collect();
        Ok(SingleQuarterLandscape { minima })
    }

    /// Per-weight minima `m(0), …, m(n_p)`.
    pub fn minima(&self) -> &[f64] {
        &self.minima
    }

    /// Ground-state weights under linear penalty `α₁` (same as [`ground_weight`]).
    pub fn ground_weights(&self, alpha1: f64) -> WeightSet {
        let values: Vec<f64> = self.minima.iter().enumerate().map(|(w, m)| m + alpha1 * w as f64).collect();
        let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
        WeightSet::from_weights(
            values.iter().enumerate().filter(|(_, &v)| v <= best + crate::ENERGY_TOL).map(|(w, _)| w),
        )
    }

    pub fn find_interval(&self, target: usize, precision: f64) -> Result<AlphaInterval> {
        if target >= self.minima.len() {
            return Err(param("target weight exceeds the number of products"));
        }
        search_window(target, precision, |a| Ok(Probe::classify(&self.ground_weights(a), target)))
    }
}

/// Window of `α₁` for which the linear-penalized single-quarter problem has
/// all ground states at weight `target`.
pub fn find_alpha1_interval(
    inst: &SingleQuarterInstance,
    target: usize,
    precision: f64,
) -> Result<AlphaInterval> {
    SingleQuarterLandscape::new(inst)?.find_interval(target, precision)
}

/// Ground-state summary of one `(α₁^(1), α₁^(2))` cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridCell {
    /// Quarter weights of the lowest-index ground state.
    pub w1: usize,
    pub w2: usize,
    /// More than one ground state.
    pub degenerate: bool,
    /// Every ground state satisfies every constraint.
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridScanResult {
    pub alpha_q1: Vec<f64>,
    pub alpha_q2: Vec<f64>,
    /// `cells[a][b]` is the cell at `(alpha_q1[a], alpha_q2[b])`.
    pub cells: Vec<Vec<GridCell>>,
    /// Index pairs whose ground states all satisfy `w₁ = w₂ = A` and every overlap constraint.
    pub satisfying: Vec<(usize, usize)>,
}

/// Largest disc of `(α₁^(1), α₁^(2))` values on which every ground state is feasible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SatisfyingRegion {
    pub center: (f64, f64),
    pub radius: f64,
}

/// `n + 1` evenly spaced values from `start` to `end` inclusive.
pub fn uniform_grid(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => alloc::vec![start],
        _ => (0..points).map(|k| start + (end - start) * k as f64 / (points - 1) as f64).collect(),
    }
}

/// The 61 × 61 default axis over `[−3, 0]`.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(-3.0, 0.0, 61)
}

/// Two-quarter problem with overlap constraints penalized quadratically,
/// profiled over the two quarter weights.
#[derive(Clone, Debug)]
pub struct TwoQuarterLandscape {
    profile: GroupedProfile,
    constraints: ConstraintSet,
    target: usize,
}

impl TwoQuarterLandscape {
    /// `overlap_alpha2` is the quadratic strength on every `x_{i,1} x_{i,2}` term.
    pub fn new(inst: &TwoQuarterInstance, overlap_alpha2: f64) -> Result<Self> {
        let (base, set) = inst.build()?;
        let overlaps = set.filtered(|c| matches!(c, Constraint::PairInequality(_)));
        let with_overlap = apply_scheme(&base, &overlaps, &PenaltyScheme::all_quadratic(&overlaps, overlap_alpha2))?;
        let groups = [inst.quarter_vars(0).collect(), inst.quarter_vars(1).collect()];
        let profile = GroupedProfile::compute(&with_overlap, &groups, &overlaps)?;
        Ok(TwoQuarterLandscape { profile, constraints: set, target: inst.budget })
    }

    fn cell_from(&self, cells: &[&ProfileCell]) -> GridCell {
        let first = cells
            .iter()
            .min_by_key(|c| c.minimizers[0])
            .expect("profile always has a minimizing cell");
        let states: usize = cells.iter().map(|c| c.minimizers.len()).sum();
        let a = self.target;
        let feasible = cells.iter().all(|c| c.weights == [a, a] && c.all_feasible);
        GridCell { w1: first.weights[0], w2: first.weights[1], degenerate: states > 1, feasible }
    }

    /// Ground state with linear penalties `α₁^(1)`, `α₁^(2)` on the quarter budgets.
    pub fn ground(&self, alpha_q1: f64, alpha_q2: f64) -> GridCell {
        let a = self.target as f64;
        let (_, cells) = self
            .profile
            .minimizing_cells(|w| alpha_q1 * (w[0] as f64 - a) + alpha_q2 * (w[1] as f64 - a));
        self.cell_from(&cells)
    }

    pub fn grid_scan(&self, grid_q1: &[f64], grid_q2: &[f64]) -> GridScanResult {
        let mut cells = Vec::with_capacity(grid_q1.len());
        let mut satisfying = Vec::new();
        for (i, &a1) in grid_q1.iter().enumerate() {
            let row: Vec<GridCell> = grid_q2.iter().map(|&a2| self.ground(a1, a2)).collect();
            for (j, c) in row.iter().enumerate() {
                if c.feasible {
                    satisfying.push((i, j));
                }
            }
            cells.push(row);
        }
        GridScanResult { alpha_q1: grid_q1.to_vec(), alpha_q2: grid_q2.to_vec(), cells, satisfying }
    }

    /// Exact largest inscribed disc of the region where `(A, A)` is the
    /// unique, feasible ground-state weight pair (clipped to `|α| ≤ 10³`).
    /// `None` if the region is empty.
    pub fn satisfying_region(&self) -> Option<SatisfyingRegion> {
        let a = self.target;
        let target = self.profile.cell(&[a, a])?;
        if !target.all_feasible {
            return None;
        }
        // rows: g · (α1, α2, r) ≤ h
        let mut rows: Vec<([f64; 3], f64)> = Vec::new();
        for c in self.profile.cells() {
            if c.weights == [a, a] {
                continue;
            }
            let d1 = c.weights[0] as f64 - a as f64;
            let d2 = c.weights[1] as f64 - a as f64;
            let norm = Float::hypot(d1, d2);
            rows.push(([-d1, -d2, norm], c.min - target.min));
        }
        const BOX: f64 = 1e3;
        rows.push(([1.0, 0.0, 1.0], BOX));
        rows.push(([-1.0, 0.0, 1.0], BOX));
        rows.push(([0.0, 1.0, 1.0], BOX));
        rows.push(([0.0, -1.0, 1.0], BOX));
        let best = max_radius_lp(&rows)?;
        (best.2 > 0.0).then_some(SatisfyingRegion { center: (best.0, best.1), radius: best.2 })
    }

    /// Quarter-1 probe with a linear penalty `α₁` on quarter 1 and a
    /// quadratic penalty `alpha2` on quarter 2's budget.
    fn mixed_probe(&self, alpha1: f64, alpha2: f64) -> Probe {
        let a = self.target;
        let af = a as f64;
        let (_, cells) = self.profile.minimizing_cells(|w| {
            let d2 = w[1] as f64 - af;
            alpha1 * (w[0] as f64 - af) + alpha2 * d2 * d2
        });
        let weights = WeightSet::from_weights(cells.iter().map(|c| c.weights[0]));
        match Probe::classify(&weights, a) {
            Probe::AtTarget { .. } => {
                let n = self.profile.num_vars();
                let mut violations = BTreeSet::new();
                for c in &cells {
                    for &k in &c.minimizers {
                        let x = BitString::from_index(k, n);
                        for label in self.constraints.violated_labels(&x) {
                            violations.insert(label);
                        }
                    }
                }
                Probe::AtTarget { violations: violations.into_iter().collect() }
            }
            other => other,
        }
    }

    pub fn mixed_search(&self, alpha2: f64, precision: f64) -> Result<AlphaInterval> {
        if !(alpha2 > 0.0) {
            return Err(param("quadratic strength must be positive"));
        }
        search_window(self.target, precision, |a| Ok(self.mixed_probe(a, alpha2)))
    }
}

/// Maximizes `r` over `{ z : g·z ≤ h }` by enumerating vertices.
fn max_radius_lp(rows: &[([f64; 3], f64)]) -> Option<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    let m = rows.len();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let Some(z) = solve3([rows[i].0, rows[j].0, rows[k].0], [rows[i].1, rows[j].1, rows[k].1]) else {
                    continue;
                };
                let ok = rows.iter().all(|(g, h)| g[0] * z[0] + g[1] * z[1] + g[2] * z[2] <= h + 1e-9);
                if ok && best.map_or(true, |b| z[2] > b.2) {
                    best = Some((z[0], z[1], z[2]));
                }
            }
        }
    }
    best
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    if d.abs() < 1e-12 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut m = a;
        for r in 0..3 {
            m[r][c] = b[r];
        }
        *slot = det(&m) / d;
    }
    Some(out)
}

/// Brute-force ground state of the two-quarter problem with linear penalties
/// on both budgets and quadratic overlap penalties.
pub fn two_quarter_ground(
    inst: &TwoQuarterInstance,
    alpha_q1: f64,
    alpha_q2: f64,
    overlap_alpha2: f64,
) -> Result<GridCell> {
    let (base, set) = inst.build()?;
    let mut scheme = PenaltyScheme::all_quadratic(&set, overlap_alpha2);
    scheme.set(TwoQuarterInstance::budget_label(0), Penalty::Linear(alpha_q1));
    scheme.set(TwoQuarterInstance::budget_label(1), Penalty::Linear(alpha_q2));
    let penalized = apply_scheme(&base, &set, &scheme)?;
    let summary = brute_force(&penalized, &ConstraintSet::new())?;
    let np = inst.n_products();
    let first = &summary.ground_states[0];
    let weight = |x: &BitString, q: usize| x.as_slice()[q * np..(q + 1) * np].iter().filter(|&&b| b).count();
    Ok(GridCell {
        w1: weight(first, 0),
        w2: weight(first, 1),
        degenerate: summary.ground_states.len() > 1,
        feasible: summary.ground_states.iter().all(|x| set.is_feasible(x)),
    })
}

/// Grid of ground-state quarter weights over `grid_q1 × grid_q2`.
pub fn grid_scan_two_quarter(
    inst: &TwoQuarterInstance,
    grid_q1: &[f64],
    grid_q2: &[f64],
    overlap_alpha2: f64,
) -> Result<GridScanResult> {
    if grid_q1.is_empty() || grid_q2.is_empty() {
        return Err(param("grid axes must be non-empty"));
    }
    Ok(TwoQuarterLandscape::new(inst, overlap_alpha2)?.grid_scan(grid_q1, grid_q2))
}

/// Linear penalty on quarter 1, quadratic penalty `alpha2` on quarter 2's
/// budget (and `overlap_alpha2` on the overlaps); searches `α₁^(1)` for the
/// window where every ground state is feasible.
pub fn mixed_scheme_search(
    inst: &TwoQuarterInstance,
    alpha2: f64,
    overlap_alpha2: f64,
    precision: f64,
) -> Result<AlphaInterval> {
    TwoQuarterLandscape::new(inst, overlap_alpha2)?.mixed_search(alpha2, precision)
}
