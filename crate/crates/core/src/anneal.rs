//! Closed-system statevector simulation of a transverse-field anneal.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{param, Error, Result};
use crate::exact::ExactSummary;
use crate::qubo::{IsingModel, QuboProblem};

/// Largest register the simulators accept.
pub const MAX_SIM_QUBITS: usize = 20;
/// Largest step count tried by [`anneal_converged`].
pub const MAX_STEPS: usize = 1 << 20;
/// Default L1 change in outcome probabilities accepted between step doublings.
pub const DEFAULT_STEP_TOL: f64 = 1e-6;

const TAYLOR_TOL: f64 = 1e-15;

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 {
        return Err(param("register needs at least one qubit"));
    }
    if n > MAX_SIM_QUBITS {
        return Err(Error::Capacity { n, max: MAX_SIM_QUBITS });
    }
    Ok(())
}

/// Amplitudes over the computational basis; bit `i` of the index is `x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Equal superposition, the ground state of `−Σσˣ`.
    pub fn uniform(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / Float::sqrt(dim as f64), 0.0);
        Ok(Statevector { n, amps: alloc::vec![a; dim] })
    }

    pub fn basis(n: usize, index: u64) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if index as usize >= dim {
            return Err(Error::Index { index: index as usize, n: dim });
        }
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(param("amplitude count must be a power of two ≥ 2"));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubits(n)?;
        let s = Statevector { n, amps };
        if (s.norm() - 1.0).abs() > 1e-9 {
            return Err(param("amplitudes are not normalized"));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amps[index as usize].norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `√(2 − 2|⟨ψ|φ⟩|)`: zero iff the states agree up to a global phase.
    pub fn distance(&self, other: &Statevector) -> Result<f64> {
        let overlap = self.inner(other)?.norm().min(1.0);
        Ok(Float::sqrt((2.0 - 2.0 * overlap).max(0.0)))
    }
}

/// `out = −Σᵢ σˣᵢ ψ`.
pub fn apply_driver(psi: &[Complex64], out: &mut [Complex64]) {
    let n = psi.len().trailing_zeros();
    for (k, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += psi[k ^ (1 << i)];
        }
        *o = -acc;
    }
}

/// Schedule `H(t) = A(t) H_D + B(t) H_P` on `[0, t_f]`. `A` and `B` take
/// the fraction `t / t_f`.
#[derive(Clone, Copy, Debug)]
pub struct AnnealSchedule {
    t_f: f64,
    a: fn(f64) -> f64,
    b: fn(f64) -> f64,
}

fn linear_down(s: f64) -> f64 {
    1.0 - s
}

fn linear_up(s: f64) -> f64 {
    s
}

impl AnnealSchedule {
    /// `A = 1 − t/t_f`, `B = t/t_f`.
    pub fn linear(t_f: f64) -> Result<Self> {
        Self::custom(t_f, linear_down, linear_up)
    }

    pub fn custom(t_f: f64, a: fn(f64) -> f64, b: fn(f64) -> f64) -> Result<Self> {
        if !(t_f > 0.0) || !t_f.is_finite() {
            return Err(param("anneal time must be positive and finite"));
        }
        Ok(AnnealSchedule { t_f, a, b })
    }

    pub fn t_f(&self) -> f64 {
        self.t_f
    }

    pub fn a(&self, t: f64) -> f64 {
        (self.a)(t / self.t_f)
    }

    pub fn b(&self, t: f64) -> f64 {
        (self.b)(t / self.t_f)
    }

    /// `(A, B, dt)` frozen at the midpoint of each of `steps` equal slices.
    pub fn slices(&self, steps: usize) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let dt = self.t_f / steps as f64;
        (0..steps).map(move |k| {
            let t = (k as f64 + 0.5) * dt;
            (self.a(t), self.b(t), dt)
        })
    }
}

/// `2^⌈log₂(10 t_f)⌉`, at least 1.
pub fn default_steps(t_f: f64) -> usize {
    let target = (10.0 * t_f).ceil().max(1.0);
    if target >= MAX_STEPS as f64 {
        return MAX_STEPS;
    }
    (target as usize).next_power_of_two()
}

/// Applies `exp(−i (a H_D + b diag(e)) dt)` by a truncated Taylor series,
/// splitting `dt` so each piece has operator norm at most one.
struct Propagator {
    diag: Vec<f64>,
    center: f64,
    spread: f64,
    n: usize,
    term: Vec<Complex64>,
    next: Vec<Complex64>,
    drive: Vec<Complex64>,
}

impl Propagator {
    fn new(diag: Vec<f64>, n: usize) -> Self {
        let (lo, hi) = diag.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| (l.min(e), h.max(e)));
        let dim = diag.len();
        let zero = Complex64::new(0.0, 0.0);
        Propagator {
            diag,
            center: 0.5 * (lo + hi),
            spread: 0.5 * (hi - lo),
            n,
            term: alloc::vec![zero; dim],
            next: alloc::vec![zero; dim],
            drive: alloc::vec![zero; dim],
        }
    }

    fn apply(&mut self, psi: &mut [Complex64], a: f64, b: f64, dt: f64) {
        let bound = a.abs() * self.n as f64 + b.abs() * self.spread;
        let pieces = (bound * dt).ceil().max(1.0) as usize;
        let tau = dt / pieces as f64;
        for _ in 0..pieces {
            self.term.copy_from_slice(psi);
            for k in 1..200 {
                apply_driver(&self.term, &mut self.drive);
                let scale = Complex64::new(0.0, -tau / k as f64);
                let mut size = 0.0;
                for (idx, nx) in self.next.iter_mut().enumerate() {
                    let h = self.drive[idx] * a + self.term[idx] * (b * (self.diag[idx] - self.center));
                    *nx = h * scale;
                    size += nx.norm_sqr();
                }
                core::mem::swap(&mut self.term, &mut self.next);
                for (p, t) in psi.iter_mut().zip(&self.term) {
                    *p += t;
                }
                if Float::sqrt(size) < TAYLOR_TOL {
                    break;
                }
            }
        }
        let phase = Complex64::from_polar(1.0, -b * self.center * dt);
        for p in psi.iter_mut() {
            *p *= phase;
        }
    }
}

/// Evolves the uniform state through `steps` midpoint-frozen slices.
pub fn anneal(m: &IsingModel, sched: &AnnealSchedule, steps: usize) -> Result<Statevector> {
    if steps == 0 {
        return Err(param("steps must be at least 1"));
    }
    let n = m.num_spins();
    let mut psi = Statevector::uniform(n)?;
    let mut prop = Propagator::new(m.diagonal(), n);
    for (a, b, dt) in sched.slices(steps) {
        prop.apply(&mut psi.amps, a, b, dt);
    }
    Ok(psi)
}

/// Result of [`anneal_converged`].
#[derive(Clone, Debug)]
pub struct ConvergedAnneal {
    pub state: Statevector,
    pub steps: usize,
    /// L1 distance between the outcome distributions at `steps` and `steps / 2`.
    pub change: f64,
}

/// Anneals with `start` steps (default [`default_steps`]) and doubles until the
/// outcome distribution moves by less than `tol` in L1.
pub fn anneal_converged(
    m: &IsingModel,
    sched: &AnnealSchedule,
    start: Option<usize>,
    tol: f64,
) -> Result<ConvergedAnneal> {
    let mut steps = start.unwrap_or_else(|| default_steps(sched.t_f())).max(1);
    let mut prev = anneal(m, sched, steps)?;
    loop {
        if steps * 2 > MAX_STEPS {
            return Err(Error::NonConvergence { steps });
        }
        steps *= 2;
        let next = anneal(m, sched, steps)?;
        let change: f64 = next.amps.iter().zip(&prev.amps).map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs()).sum();
        if change < tol {
            return Ok(ConvergedAnneal { state: next, steps, change });
        }
        prev = next;
    }
}

/// Success and feasibility probabilities of a final state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunMetrics {
    pub p_success: f64,
    pub p_feasible: f64,
    /// Normalization factor applied before the run (1 if none).
    pub normalization: f64,
}

/// `P_S` and `P_F` of `psi` against the unpenalized problem's exact summary.
pub fn measure_metrics(psi: &Statevector, exact: &ExactSummary) -> Result<RunMetrics> {
    if psi.n != exact.n {
        return Err(Error::Dimension { expected: exact.n, found: psi.n });
    }
    let p_success = exact.optimal_indices().iter().map(|&k| psi.probability(k)).sum();
    let p_feasible = exact.feasible.iter().map(|k| psi.probability(k)).sum();
    Ok(RunMetrics { p_success, p_feasible, normalization: 1.0 })
}

/// Settings for [`run_qa`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QaConfig {
    pub t_f: f64,
    /// Fixed step count; `None` doubles from the default until converged.
    pub steps: Option<usize>,
    pub coupling_bound: f64,
    pub field_bound: f64,
    pub step_tol: f64,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig { t_f: 10.0, steps: None, coupling_bound: 1.0, field_bound: 3.0, step_tol: DEFAULT_STEP_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QaOutcome {
    pub metrics: RunMetrics,
    pub steps: usize,
}

/// Normalizes the penalized problem's Ising form, anneals it, and measures
/// against `exact` (the summary of the unpenalized constrained problem).
pub fn run_qa(penalized: &QuboProblem, exact: &ExactSummary, cfg: &QaConfig) -> Result<QaOutcome> {
    let (model, report) = penalized.to_ising().normalized(cfg.coupling_bound, cfg.field_bound)?;
    let sched = AnnealSchedule::linear(cfg.t_f)?;
    let (state, steps) = match cfg.steps {
        Some(s) => (anneal(&model, &sched, s)?, s),
        None => {
            let c = anneal_converged(&model, &sched, None, cfg.step_tol)?;
            (c.state, c.steps)
        }
    };
    let mut metrics = measure_metrics(&state, exact)?;
    metrics.normalization = report.factor;
    Ok(QaOutcome { metrics, steps })
}
