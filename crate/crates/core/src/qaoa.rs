//! Layered phase/mixer circuits with classically optimized angles.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anneal::{check_qubits, measure_metrics, AnnealSchedule, RunMetrics, Statevector};
use crate::error::{param, Error, Result};
use crate::exact::{brute_force, ExactSummary};
use crate::optim::{minimize, MinimizeOptions, TracePoint};
use crate::penalty::{apply_scheme, ConstraintSet, PenaltyScheme};
use crate::qubo::{IsingModel, QuboProblem};

/// Phase angles `γ` and mixer angles `β`, one of each per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct QaoaParams {
    gamma: Vec<f64>,
    beta: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.len() != beta.len() {
            return Err(param("need equal, non-zero numbers of phase and mixer angles"));
        }
        Ok(QaoaParams { gamma, beta })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(alloc::vec![0.0; p], alloc::vec![0.0; p])
    }

    /// `[γ₁ … γ_p, β₁ … β_p]`.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 0 {
            return Err(param("flat angle vector must have even length"));
        }
        let (g, b) = x.split_at(x.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gamma.iter().chain(&self.beta).copied().collect()
    }

    pub fn layers(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

/// Exact expectation values, or the empirical mean over a number of samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Sampled(u64),
}

/// How the best of several restarts is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestartSelection {
    /// Highest success probability. Needs the known optimum, so only
    /// available in simulation.
    SuccessProbability,
    /// Lowest exact mean objective.
    MeanObjective,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QaoaRunConfig {
    pub layers: usize,
    pub shots_optimize: Shots,
    pub shots_final: Shots,
    pub max_iterations: usize,
    pub restarts: usize,
    pub rng_seed: u64,
    pub selection: RestartSelection,
}

impl QaoaRunConfig {
    /// Eight layers, 1000 shots per evaluation, 100 iterations, 10 restarts.
    pub fn desk() -> Self {
        QaoaRunConfig {
            layers: 8,
            shots_optimize: Shots::Sampled(1000),
            shots_final: Shots::Exact,
            max_iterations: 100,
            restarts: 10,
            rng_seed: 0,
            selection: RestartSelection::SuccessProbability,
        }
    }

    /// As [`desk`](Self::desk) but with 80 restarts and 10⁶ final shots.
    pub fn full_scale() -> Self {
        QaoaRunConfig { restarts: 80, shots_final: Shots::Sampled(1_000_000), ..Self::desk() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.restarts == 0 {
            return Err(Error::Configuration(String::from("layers and restarts must be positive")));
        }
        if self.shots_optimize == Shots::Sampled(0) || self.shots_final == Shots::Sampled(0) {
            return Err(Error::Configuration(String::from("shot counts must be positive")));
        }
        Ok(())
    }

    /// Generator for restart `k`: the seed's ChaCha8 stream number `k`.
    pub fn restart_rng(&self, k: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(k as u64);
        rng
    }
}

fn apply_phase(amps: &mut [Complex64], diag: &[f64], gamma: f64) {
    for (a, e) in amps.iter_mut().zip(diag) {
        *a *= Complex64::from_polar(1.0, -gamma * e);
    }
}

/// `e^{+iβσˣ}` on every qubit.
fn apply_mixer(amps: &mut [Complex64], n: usize, beta: f64) {
    let c = Complex64::new(Float::cos(beta), 0.0);
    let s = Complex64::new(0.0, Float::sin(beta));
    for q in 0..n {
        let bit = 1usize << q;
        for k in 0..amps.len() {
            if k & bit == 0 {
                let (a, b) = (amps[k], amps[k | bit]);
                amps[k] = c * a + s * b;
                amps[k | bit] = s * a + c * b;
            }
        }
    }
}

fn evolve(diag: &[f64], n: usize, params: &QaoaParams) -> Result<Statevector> {
    let mut psi = Statevector::uniform(n)?;
    let amps = psi.amplitudes_mut();
    for (g, b) in params.gamma.iter().zip(&params.beta) {
        apply_phase(amps, diag, *g);
        apply_mixer(amps, n, *b);
    }
    Ok(psi)
}

/// Applies `p` alternating phase and mixer layers to the uniform state.
pub fn qaoa_state(m: &IsingModel, params: &QaoaParams) -> Result<Statevector> {
    check_qubits(m.num_spins())?;
    evolve(&m.diagonal(), m.num_spins(), params)
}

fn sample_index<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = cumulative[cumulative.len() - 1];
    let u = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

fn cumulative(psi: &Statevector) -> Vec<f64> {
    let mut acc = 0.0;
    psi.amplitudes()
        .iter()
        .map(|a| {
            acc += a.norm_sqr();
            acc
        })
        .collect()
}

fn mean_over(psi: &Statevector, table: &[f64], shots: Shots, rng: &mut impl Rng) -> f64 {
    match shots {
        Shots::Exact => psi.amplitudes().iter().zip(table).map(|(a, f)| a.norm_sqr() * f).sum(),
        Shots::Sampled(s) => {
            let cum = cumulative(psi);
            (0..s).map(|_| table[sample_index(&cum, rng)]).sum::<f64>() / s as f64
        }
    }
}

/// `⟨f⟩` under `psi`, exactly or from `shots` measurement samples.
pub fn estimate_objective(psi: &Statevector, p: &QuboProblem, shots: Shots, rng: &mut impl Rng) -> Result<f64> {
    if psi.num_qubits() != p.num_vars() {
        return Err(Error::Dimension { expected: p.num_vars(), found: psi.num_qubits() });
    }
    if shots == Shots::Sampled(0) {
        return Err(param("shot count must be positive"));
    }
    Ok(mean_over(psi, &p.objective_table(), shots, rng))
}

/// Fraction of `shots` samples landing in `accept`.
fn sampled_fraction(psi: &Statevector, shots: u64, rng: &mut impl Rng, accept: impl Fn(u64) -> bool) -> f64 {
    let cum = cumulative(psi);
    (0..shots).filter(|_| accept(sample_index(&cum, rng) as u64)).count() as f64 / shots as f64
}

/// One optimizer run from random initial angles.
#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub initial: QaoaParams,
    pub params: QaoaParams,
    /// Exact success probability of the final angles.
    pub p_success: f64,
    /// Exact mean objective of the final angles.
    pub mean_objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AngleSearch {
    pub best_restart: usize,
    pub restarts: Vec<RestartOutcome>,
}

impl AngleSearch {
    pub fn best(&self) -> &RestartOutcome {
        &self.restarts[self.best_restart]
    }
}

/// Runs restart `k` of the angle optimization.
pub fn optimize_restart(
    m: &IsingModel,
    penalized: &QuboProblem,
    target: &ExactSummary,
    cfg: &QaoaRunConfig,
    k: usize,
) -> Result<RestartOutcome> {
    cfg.validate()?;
    let n = m.num_spins();
    check_qubits(n)?;
    if penalized.num_vars() != n || target.n != n {
        return Err(Error::Dimension { expected: n, found: penalized.num_vars() });
    }
    let diag = m.diagonal();
    let table = penalized.objective_table();
    let mut rng = cfg.restart_rng(k);
    let x0: Vec<f64> = (0..2 * cfg.layers).map(|_| rng.gen::<f64>()).collect();
    let opts = MinimizeOptions { max_iterations: cfg.max_iterations, ..MinimizeOptions::default() };
    let mut failure = None;
    let result = minimize(
        |x| {
            let params = QaoaParams::from_flat(x).expect("flat vector has 2p entries");
            match evolve(&diag, n, &params) {
                Ok(psi) => mean_over(&psi, &table, cfg.shots_optimize, &mut rng),
                Err(e) => {
                    failure = Some(e);
                    f64::INFINITY
                }
            }
        },
        &x0,
        &opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let params = QaoaParams::from_flat(&result.x)?;
    let psi = evolve(&diag, n, &params)?;
    let p_success = measure_metrics(&psi, target)?.p_success;
    let mean_objective = mean_over(&psi, &table, Shots::Exact, &mut rng);
    Ok(RestartOutcome {
        initial: QaoaParams::from_flat(&x0)?,
        params,
        p_success,
        mean_objective,
        iterations: result.iterations,
        evaluations: result.evaluations,
        trace: result.trace,
    })
}

/// Picks the best restart; ties go to the lowest restart index.
pub fn select_restart(outcomes: &[RestartOutcome], selection: RestartSelection) -> Option<usize> {
    let key = |o: &RestartOutcome| match selection {
        RestartSelection::SuccessProbability => -o.p_success,
        RestartSelection::MeanObjective => o.mean_objective,
    };
    let mut best: Option<usize> = None;
    for (k, o) in outcomes.iter().enumerate() {
        if best.map_or(true, |b| key(o) < key(&outcomes[b])) {
            best = Some(k);
        }
    }
    best
}

/// Optimizes angles from `cfg.restarts` random starts in `[0, 1)` and keeps
/// the best by `cfg.selection`.
pub fn optimize_angles(
    m: &IsingModel,
    penalized: &QuboProblem,
    target: &ExactSummary,
    cfg: &QaoaRunConfig,
) -> Result<AngleSearch> {
    cfg.validate()?;
    let restarts = (0..cfg.restarts)
        .map(|k| optimize_restart(m, penalized, target, cfg, k))
        .collect::<Result<Vec<_>>>()?;
    let best_restart = select_restart(&restarts, cfg.selection).unwrap_or(0);
    Ok(AngleSearch { best_restart, restarts })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QaoaRun {
    pub metrics: RunMetrics,
    pub mean_objective: f64,
    pub search: AngleSearch,
}

/// Final metrics for given angles, exactly or from `cfg.shots_final` samples.
pub fn final_metrics(
    psi: &Statevector,
    penalized: &QuboProblem,
    target: &ExactSummary,
    cfg: &QaoaRunConfig,
) -> Result<(RunMetrics, f64)> {
    // a stream past every restart's
    let mut rng = cfg.restart_rng(cfg.restarts);
    match cfg.shots_final {
        Shots::Exact => Ok((measure_metrics(psi, target)?, estimate_objective(psi, penalized, Shots::Exact, &mut rng)?)),
        Shots::Sampled(s) => {
            let optimal = target.optimal_indices();
            let p_success = sampled_fraction(psi, s, &mut rng, |k| optimal.binary_search(&k).is_ok());
            let p_feasible = sampled_fraction(psi, s, &mut rng, |k| target.feasible.contains(k));
            let mean = estimate_objective(psi, penalized, Shots::Sampled(s), &mut rng)?;
            Ok((RunMetrics { p_success, p_feasible, normalization: 1.0 }, mean))
        }
    }
}

/// Penalizes, optimizes angles on the unnormalized Ising form, and reports
/// metrics against the unpenalized constrained optimum.
pub fn run_qaoa(
    base: &QuboProblem,
    constraints: &ConstraintSet,
    scheme: &PenaltyScheme,
    cfg: &QaoaRunConfig,
) -> Result<QaoaRun> {
    let target = brute_force(base, constraints)?;
    let penalized = apply_scheme(base, constraints, scheme)?;
    run_qaoa_penalized(&penalized, &target, cfg)
}

/// [`run_qaoa`] for an already-penalized problem and known exact summary.
pub fn run_qaoa_penalized(penalized: &QuboProblem, target: &ExactSummary, cfg: &QaoaRunConfig) -> Result<QaoaRun> {
    let m = penalized.to_ising();
    let search = optimize_angles(&m, penalized, target, cfg)?;
    let psi = qaoa_state(&m, &search.best().params)?;
    let (metrics, mean_objective) = final_metrics(&psi, penalized, target, cfg)?;
    Ok(QaoaRun { metrics, mean_objective, search })
}

/// Angles reproducing `p` midpoint slices of an anneal to first order:
/// `γ_k = B(t_k) Δt`, `β_k = A(t_k) Δt`.
pub fn schedule_angles(sched: &AnnealSchedule, p: usize) -> Result<QaoaParams> {
    if p == 0 {
        return Err(param("need at least one layer"));
    }
    let (gamma, beta) = sched.slices(p).map(|(a, b, dt)| (b * dt, a * dt)).unzip();
    QaoaParams::new(gamma, beta)
}
