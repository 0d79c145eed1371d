//! Acceptance gate. Every criterion prints one PASS or FAIL line; the
//! process exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::*;
use linpen::config::{ExperimentConfig, ExperimentKind, InstanceSelector, ShotSetting};
use linpen::experiments::{
    read_csv, run_experiment, GridRow, GridSummaryRow, MixedRow, NormRow, QaRow, QaoaRow, GRID_FILE,
    GRID_SUMMARY_FILE, MIXED_FILE, NORM_FILE, QAOA_METRICS_FILE, QA_METRICS_FILE,
};
use linpen::files::{Corpus, SINGLE_DIR, TWO_QUARTER_DIR};
use linpen::manifest::RunManifest;
use linpen::summarize::summarize;
use linpen_core::anneal::{anneal, anneal_converged, default_steps, measure_metrics};
use linpen_core::penalty::{apply_scheme, quadratic_equality_penalty, quadratic_inequality_penalty};
use linpen_core::qaoa::{qaoa_state, schedule_angles};
use linpen_core::search::find_alpha1_interval;
use linpen_core::{
    brute_force, min_objective_by_weight, AnnealSchedule, CMatrix, ConstraintSet, EqualityConstraint,
    IsingModel, PairInequalityConstraint, Penalty, PenaltyScheme, QaoaParams, QuboProblem,
    SingleQuarterInstance, Statevector, TwoQuarterInstance,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: linpen_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn harness<T>(r: linpen::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn config(sizes: &[usize], count: Option<usize>, corpus: &str, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        corpus: Some(shipped_corpus().join(corpus)),
        output: Some(out.to_path_buf()),
        instances: InstanceSelector { ids: Vec::new(), sizes: sizes.to_vec(), count },
        ..Default::default()
    }
}

fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RunManifest, String> {
    let report = harness(run_experiment(kind, cfg, 0))?;
    ensure(report.failed.is_empty(), || format!("{kind}: {} instances failed: {:?}", report.failed.len(), report.failed))?;
    let text = std::fs::read_to_string(&report.manifest).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn rows<R: serde::de::DeserializeOwned>(dir: &Path, file: &str) -> Result<Vec<R>, String> {
    harness(read_csv(&dir.join(file)))
}

fn c1_conversion() -> Outcome {
    let mut p = QuboProblem::new(2);
    core(p.add_quadratic(0, 1, 2.0))?;
    let m = p.to_ising();
    ensure(m.coupling(0, 1) == 0.5 && m.field(0) == -0.5 && m.field(1) == -0.5, || {
        format!("worked example gave J = {}, h = ({}, {})", m.coupling(0, 1), m.field(0), m.field(1))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=10);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut b = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(0.7) {
                    b.push((i, j, rng.gen_range(-2.0..2.0)));
                }
            }
        }
        let offset = rng.gen_range(-1.0..1.0);
        let mut p = QuboProblem::new(n);
        for (i, &ai) in a.iter().enumerate() {
            core(p.add_linear(i, ai))?;
        }
        for &(i, j, v) in &b {
            core(p.add_quadratic(i, j, v))?;
        }
        p.add_offset(offset);
        let m = p.to_ising();
        let fields: Vec<(usize, f64)> = m.fields().collect();
        let couplings: Vec<((usize, usize), f64)> = m.couplings().collect();
        for k in 0..1u64 << n {
            let x = |i: usize| if bit(k, i) { 1.0 } else { 0.0 };
            let s = |i: usize| 1.0 - 2.0 * x(i);
            let f = offset
                + a.iter().enumerate().map(|(i, ai)| ai * x(i)).sum::<f64>()
                + b.iter().map(|&(i, j, v)| v * x(i) * x(j)).sum::<f64>();
            let e = m.constant()
                + fields.iter().map(|&(i, h)| h * s(i)).sum::<f64>()
                + couplings.iter().map(|&((i, j), jij)| jij * s(i) * s(j)).sum::<f64>();
            let scale = f.abs().max(1.0);
            worst = worst.max((e - f).abs() / scale).max((m.energy_index(k) - f).abs() / scale);
        }
    }
    ensure(worst <= 1e-12, || format!("energy identity off by {worst:e} (relative)"))?;
    Ok(format!("worked example exact; 50 random QUBOs, worst relative error {worst:.1e}"))
}

fn c2_penalties() -> Outcome {
    let mut strings = 0u64;
    for np in 1..=8usize {
        for a in 0..=np {
            for alpha2 in [0.5, 2.0, 3.25] {
                let con = core(EqualityConstraint::count("budget", 0..np, a as f64))?;
                let p = core(quadratic_equality_penalty(np, &con, alpha2))?;
                let af = a as f64;
                for i in 0..np {
                    ensure(p.linear(i) == alpha2 * (1.0 - 2.0 * af), || format!("linear coefficient {}", p.linear(i)))?;
                    for j in i + 1..np {
                        ensure(p.quadratic(i, j) == 2.0 * alpha2, || format!("pair coefficient {}", p.quadratic(i, j)))?;
                    }
                }
                ensure(p.offset() == alpha2 * af * af, || format!("offset {}", p.offset()))?;
                for k in 0..1u64 << np {
                    let v = p.evaluate_index(k);
                    let d = weight(k) as f64 - af;
                    let ok = if d == 0.0 { v.abs() <= 1e-12 } else { v > 0.0 && (v - alpha2 * d * d).abs() <= 1e-12 };
                    ensure(ok, || format!("n_p = {np}, A = {a}, x = {k:b}: penalty {v}"))?;
                    strings += 1;
                }
            }
            if np >= 2 {
                let pair = core(PairInequalityConstraint::new("once", 0, np - 1))?;
                let p = core(quadratic_inequality_penalty(np, &pair, 2.0))?;
                for k in 0..1u64 << np {
                    let both = bit(k, 0) && bit(k, np - 1);
                    let v = p.evaluate_index(k);
                    ensure(if both { v > 0.0 } else { v == 0.0 }, || format!("pair penalty {v} at {k:b}"))?;
                }
            }
        }
    }
    Ok(format!("{strings} (instance, string) pairs checked; expansion coefficients exact"))
}

fn c3_monotone() -> Outcome {
    let corpus = single_corpus();
    let mut instances = 0;
    let mut violations = 0;
    for np in [6, 8, 10] {
        for e in corpus.entries.iter().filter(|e| e.n_p == np).take(100) {
            let inst = harness(corpus.load(e))?;
            let s = inst.as_single().ok_or("expected a single-quarter instance")?;
            let c = s.c.rows();
            let oracle = weight_minima(np, |k| cannibalization(&c, k, 0));
            let (base, _) = core(s.build())?;
            let got = core(min_objective_by_weight(&base))?;
            for (w, m) in got.iter().enumerate() {
                ensure((m.value - oracle[w]).abs() <= 1e-12, || format!("{}: weight {w} minimum {} vs {}", e.id, m.value, oracle[w]))?;
            }
            violations += oracle.windows(2).filter(|p| p[1] < p[0]).count();
            instances += 1;
        }
    }
    ensure(instances == 300, || format!("only {instances} instances in the corpus"))?;
    ensure(violations == 0, || format!("{violations} decreasing steps"))?;
    Ok(format!("{instances} instances (n_p 6, 8, 10), 0 violations"))
}

fn no_window_instance() -> Result<SingleQuarterInstance, String> {
    let rows = [
        vec![0.0, 0.2, 0.7, 0.1, 0.6, 0.1],
        vec![0.2, 0.0, 0.3, 0.8, 0.3, 0.9],
        vec![0.7, 0.3, 0.0, 0.3, 0.3, 0.9],
        vec![0.1, 0.8, 0.3, 0.0, 0.4, 0.2],
        vec![0.6, 0.3, 0.3, 0.4, 0.0, 0.9],
        vec![0.1, 0.9, 0.9, 0.2, 0.9, 0.0],
    ];
    core(SingleQuarterInstance::new("6_nowindow", core(CMatrix::from_rows(&rows))?, 4))
}

fn c4_alpha1() -> Outcome {
    let corpus = single_corpus();
    let scan: Vec<f64> = (0..=500).map(|k| -4.0 + 5.0 * k as f64 / 500.0).collect();
    let (mut found, mut samples) = (0, 0);
    for e in corpus.entries.iter().filter(|e| e.n_p == 8).take(20) {
        let inst = harness(corpus.load(e))?;
        let s = inst.as_single().ok_or("expected a single-quarter instance")?;
        let c = s.c.rows();
        let a = s.budget;
        let f = |k: u64| cannibalization(&c, k, 0);
        let ground = |alpha: f64| {
            let (_, at) = argmins(8, |k| f(k) + alpha * (weight(k) as f64 - a as f64));
            let w: Vec<usize> = at.iter().map(|&k| weight(k)).collect();
            (*w.iter().min().unwrap(), *w.iter().max().unwrap())
        };
        let mut prev = ground(scan[0]);
        for &alpha in &scan[1..] {
            let next = ground(alpha);
            ensure(next.1 <= prev.0, || format!("{}: ground weight rises near α₁ = {alpha}", e.id))?;
            prev = next;
        }

        let iv = core(find_alpha1_interval(s, a, 1e-5))?;
        let minima = weight_minima(8, f);
        ensure(iv.found == window_exists(&minima, a), || format!("{}: found = {} disagrees with the hull test", e.id, iv.found))?;
        if !iv.found {
            continue;
        }
        found += 1;
        let lo = if iv.lo.is_finite() { iv.lo } else { iv.hi - iv.hi.abs().max(1.0) };
        let hi = if iv.hi.is_finite() { iv.hi } else { iv.lo + iv.lo.abs().max(1.0) };
        let optimum = minima[a];
        for j in 1..=10 {
            let alpha = lo + (hi - lo) * j as f64 / 11.0;
            let (_, at) = argmins(8, |k| f(k) + alpha * (weight(k) as f64 - a as f64));
            ensure(at.iter().all(|&k| weight(k) == a && (f(k) - optimum).abs() <= TOL), || {
                format!("{}: α₁ = {alpha} in [{}, {}] misses the constrained optimum", e.id, iv.lo, iv.hi)
            })?;
            samples += 1;
        }
    }
    let odd = no_window_instance()?;
    let iv = core(find_alpha1_interval(&odd, 4, 1e-5))?;
    let minima = weight_minima(6, |k| cannibalization(&odd.c.rows(), k, 0));
    ensure(!iv.found && !window_exists(&minima, 4), || "constructed instance unexpectedly has a window".into())?;
    Ok(format!("20 dense scans monotone; {found}/20 windows, {samples} interior samples optimal; constructed instance found = false"))
}

fn two_quarter_ground_ok(t: &TwoQuarterInstance, scheme: &PenaltyScheme) -> Result<bool, String> {
    let (base, set) = core(t.build())?;
    let penalized = core(apply_scheme(&base, &set, scheme))?;
    let n = t.n_products();
    let (_, at) = argmins(2 * n, |k| penalized.evaluate_index(k));
    Ok(at.iter().all(|&k| {
        block_weight(k, 0, n) == t.budget && block_weight(k, n, n) == t.budget && (0..n).all(|i| !(bit(k, i) && bit(k, n + i)))
    }))
}

fn linear_budgets(set: &ConstraintSet, a1: f64, a2: f64, overlap: f64) -> PenaltyScheme {
    PenaltyScheme::all_quadratic(set, overlap)
        .with(TwoQuarterInstance::budget_label(0), Penalty::Linear(a1))
        .with(TwoQuarterInstance::budget_label(1), Penalty::Linear(a2))
}

fn c5_grid() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let grid_out = dir.path().join("grid");
    run(ExperimentKind::GridScan, &config(&[8], None, TWO_QUARTER_DIR, &grid_out))?;
    let summary: Vec<GridSummaryRow> = rows(&grid_out, GRID_SUMMARY_FILE)?;
    let cells: Vec<GridRow> = rows(&grid_out, GRID_FILE)?;
    let corpus = two_quarter_corpus();
    let load = |id: &str| -> Result<TwoQuarterInstance, String> {
        harness(corpus.load_id(id))?.as_two_quarter().cloned().ok_or_else(|| format!("{id} is not two-quarter"))
    };

    let with: Vec<&GridSummaryRow> = summary.iter().filter(|r| r.region_exists).collect();
    let without: Vec<&GridSummaryRow> = summary.iter().filter(|r| !r.region_exists).collect();
    ensure(!with.is_empty() && !without.is_empty(), || {
        format!("{} instances with a satisfying region, {} without", with.len(), without.len())
    })?;
    for r in &with {
        let t = load(&r.instance_id)?;
        let (_, set) = core(t.build())?;
        let (c1, c2) = (r.region_center_q1.unwrap_or(f64::NAN), r.region_center_q2.unwrap_or(f64::NAN));
        ensure(two_quarter_ground_ok(&t, &linear_budgets(&set, c1, c2, 2.0))?, || {
            format!("{}: region centre ({c1}, {c2}) is not satisfying", r.instance_id)
        })?;
    }
    for r in &without {
        let t = load(&r.instance_id)?;
        let (_, set) = core(t.build())?;
        for cell in cells.iter().filter(|c| c.instance_id == r.instance_id) {
            ensure(!cell.feasible, || format!("{}: satisfying cell reported without a region", r.instance_id))?;
        }
        for i in (0..=60).step_by(6) {
            for j in (0..=60).step_by(6) {
                let (a1, a2) = (-3.0 + 0.05 * i as f64, -3.0 + 0.05 * j as f64);
                ensure(!two_quarter_ground_ok(&t, &linear_budgets(&set, a1, a2, 2.0))?, || {
                    format!("{}: brute force satisfies ({a1}, {a2})", r.instance_id)
                })?;
            }
        }
    }

    let mut rescued = 0;
    let mut logged = 0;
    let mut by_alpha2 = Vec::new();
    for alpha2 in [2.0, 4.0] {
        let out = dir.path().join(format!("mixed_{alpha2}"));
        let mut cfg = config(&[], None, TWO_QUARTER_DIR, &out);
        cfg.instances.ids = without.iter().map(|r| r.instance_id.clone()).collect();
        cfg.penalty.mixed_alpha2 = alpha2;
        let manifest = run(ExperimentKind::MixedSearch, &cfg)?;
        let mixed: Vec<MixedRow> = rows(&out, MIXED_FILE)?;
        let mut ok = 0;
        for m in &mixed {
            if m.found {
                let t = load(&m.instance_id)?;
                let (_, set) = core(t.build())?;
                let hi = if m.hi.is_finite() { m.hi } else { m.lo + m.lo.abs().max(1.0) };
                let lo = if m.lo.is_finite() { m.lo } else { hi - hi.abs().max(1.0) };
                let scheme = PenaltyScheme::all_quadratic(&set, m.overlap_alpha2)
                    .with(TwoQuarterInstance::budget_label(0), Penalty::Linear(0.5 * (lo + hi)))
                    .with(TwoQuarterInstance::budget_label(1), Penalty::Quadratic(alpha2));
                ensure(two_quarter_ground_ok(&t, &scheme)?, || format!("{}: mixed window midpoint fails", m.instance_id))?;
                ok += 1;
            } else {
                ensure(manifest.skipped.iter().any(|n| n.id == m.instance_id), || {
                    format!("{}: mixed failure not logged in the run manifest", m.instance_id)
                })?;
                logged += 1;
            }
        }
        rescued += ok;
        by_alpha2.push(format!("α₂ = {alpha2}: {ok}/{} windows", mixed.len()));
    }
    Ok(format!(
        "{} of {} instances satisfiable, {} not; mixed scheme on the rest: {} ({rescued} validated, {logged} failures logged)",
        with.len(),
        summary.len(),
        without.len(),
        by_alpha2.join(", ")
    ))
}

fn rk4_two_level(h: f64, t_f: f64, steps: usize) -> [Complex64; 2] {
    let i = Complex64::new(0.0, 1.0);
    let deriv = |t: f64, y: [Complex64; 2]| {
        let (a, b) = (1.0 - t / t_f, t / t_f);
        let h0 = y[0] * (b * h) - y[1] * a;
        let h1 = -y[0] * a - y[1] * (b * h);
        [-i * h0, -i * h1]
    };
    let r = Complex64::new(0.5f64.sqrt(), 0.0);
    let mut y = [r, r];
    let dt = t_f / steps as f64;
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = deriv(t, y);
        let k2 = deriv(t + dt / 2.0, [y[0] + k1[0] * (dt / 2.0), y[1] + k1[1] * (dt / 2.0)]);
        let k3 = deriv(t + dt / 2.0, [y[0] + k2[0] * (dt / 2.0), y[1] + k2[1] * (dt / 2.0)]);
        let k4 = deriv(t + dt, [y[0] + k3[0] * dt, y[1] + k3[1] * dt]);
        for c in 0..2 {
            y[c] += (k1[c] + k2[c] * 2.0 + k3[c] * 2.0 + k4[c]) * (dt / 6.0);
        }
    }
    y
}

fn penalized_model(s: &SingleQuarterInstance, penalty: Penalty) -> Result<(QuboProblem, ConstraintSet), String> {
    let (base, set) = core(s.build())?;
    let scheme = PenaltyScheme::new().with(linpen_core::instance::BUDGET_LABEL, penalty);
    Ok((core(apply_scheme(&base, &set, &scheme))?, set))
}

fn c6_qa() -> Outcome {
    let corpus = single_corpus();
    let inst = harness(corpus.load_id("6_0"))?;
    let s = inst.as_single().ok_or("6_0 is not single-quarter")?;
    let (penalized, _) = penalized_model(s, Penalty::Quadratic(2.0))?;
    let (model, _) = core(penalized.to_ising().normalized(1.0, 3.0))?;

    let psi = core(anneal(&model, &core(AnnealSchedule::linear(10.0))?, default_steps(10.0)))?;
    let drift = (psi.norm() - 1.0).abs();
    ensure(drift < 1e-9, || format!("norm drift {drift:e}"))?;

    let quick = core(anneal(&model, &core(AnnealSchedule::linear(1e-9))?, 1))?;
    let uniform = 1.0 / 64.0;
    let spread = quick.probabilities().iter().map(|p| (p - uniform).abs()).fold(0.0, f64::max);
    ensure(spread < 1e-6, || format!("t_f → 0 deviates from uniform by {spread:e}"))?;

    let mut one = IsingModel::new(1);
    core(one.add_field(0, 1.0))?;
    let run = core(anneal_converged(&one, &core(AnnealSchedule::linear(50.0))?, None, 1e-8))?;
    let oracle = rk4_two_level(1.0, 50.0, 200_000);
    let p_ground = run.state.probability(1);
    let amps = run.state.amplitudes();
    let overlap = (amps[0].conj() * oracle[0] + amps[1].conj() * oracle[1]).norm();
    ensure(p_ground > 0.99, || format!("single-qubit ground probability {p_ground}"))?;
    ensure((p_ground - oracle[1].norm_sqr()).abs() < 1e-6 && overlap > 1.0 - 1e-8, || {
        format!("single qubit disagrees with RK4: P = {p_ground} vs {}, overlap {overlap}", oracle[1].norm_sqr())
    })?;

    let mut worst = 0.0f64;
    let mut steps_seen = Vec::new();
    for e in corpus.entries.iter().filter(|e| e.n_p == 6).take(5) {
        let s = harness(corpus.load(e))?;
        let s = s.as_single().ok_or("expected a single-quarter instance")?;
        let (penalized, set) = penalized_model(s, Penalty::Quadratic(2.0))?;
        let (base, _) = core(s.build())?;
        let exact = core(brute_force(&base, &set))?;
        let (model, _) = core(penalized.to_ising().normalized(1.0, 3.0))?;
        let sched = core(AnnealSchedule::linear(10.0))?;
        let conv = core(anneal_converged(&model, &sched, None, 1e-6))?;
        let half = core(anneal(&model, &sched, conv.steps / 2))?;
        let p_full = core(measure_metrics(&conv.state, &exact))?.p_success;
        let p_half = core(measure_metrics(&half, &exact))?.p_success;
        worst = worst.max((p_full - p_half).abs());
        steps_seen.push(conv.steps);
    }
    ensure(worst < 1e-6, || format!("step doubling moved P_S by {worst:e}"))?;
    Ok(format!(
        "norm drift {drift:.1e}; t_f→0 spread {spread:.1e}; single qubit P = {p_ground:.5} (RK4 {:.5}); doubling ΔP_S ≤ {worst:.1e} at {steps_seen:?} steps",
        oracle[1].norm_sqr()
    ))
}

fn ising_factor(p: &QuboProblem) -> f64 {
    let n = p.num_vars();
    let mut h = vec![0.0; n];
    let mut max_j = 0.0f64;
    for (i, a) in p.linear_terms() {
        h[i] -= a / 2.0;
    }
    for ((i, j), b) in p.quadratic_terms() {
        h[i] -= b / 4.0;
        h[j] -= b / 4.0;
        max_j = max_j.max((b / 4.0).abs());
    }
    let max_h = h.iter().map(|v| v.abs()).fold(0.0, f64::max);
    max_j.max(max_h / 3.0)
}

fn c7_norm_ratio() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sizes: Vec<usize> = (6..=12).collect();
    run(ExperimentKind::NormRatio, &config(&sizes, None, SINGLE_DIR, dir.path()))?;
    let data: Vec<NormRow> = rows(dir.path(), NORM_FILE)?;
    let corpus = single_corpus();
    let mut by_size: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &data {
        let inst = harness(corpus.load_id(&r.instance_id))?;
        let s = inst.as_single().ok_or("expected a single-quarter instance")?;
        let nq = ising_factor(&penalized_model(s, Penalty::Quadratic(r.alpha2))?.0);
        let nl = ising_factor(&penalized_model(s, Penalty::Linear(r.alpha1))?.0);
        ensure((nq - r.n_quadratic).abs() <= 1e-12 * nq && (nl - r.n_linear).abs() <= 1e-12 * nl, || {
            format!("{}: factors ({}, {}) vs oracle ({nq}, {nl})", r.instance_id, r.n_quadratic, r.n_linear)
        })?;
        by_size.entry(r.n_products).or_default().push(r.ratio);
    }
    ensure(by_size.len() == sizes.len(), || format!("only sizes {:?} present", by_size.keys().collect::<Vec<_>>()))?;
    let means: Vec<String> = by_size.iter().map(|(n, v)| format!("{n}: {:.2}", mean(v))).collect();
    ensure(by_size.values().all(|v| mean(v) > 1.0), || format!("mean N_Q/N_L not above 1: {means:?}"))?;
    Ok(format!("mean N_Q/N_L by n_p {{{}}}", means.join(", ")))
}

fn baseline(corpus: &Corpus, id: &str) -> Result<f64, String> {
    let inst = harness(corpus.load_id(id))?;
    let s = inst.as_single().ok_or("expected a single-quarter instance")?;
    let c = s.c.rows();
    let n = c.len();
    Ok(optimal_count(n, s.budget, |k| cannibalization(&c, k, 0)) as f64 / (1u64 << n) as f64)
}

fn c8_qa_pipeline() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = config(&[6, 8], Some(50), SINGLE_DIR, dir.path());
    cfg.anneal.t_f = 10.0;
    cfg.penalty.alpha2 = 2.0;
    let manifest = run(ExperimentKind::QaCompare, &cfg)?;
    let data: Vec<QaRow> = rows(dir.path(), QA_METRICS_FILE)?;
    let corpus = single_corpus();
    let mut report = Vec::new();
    let mut medians = BTreeMap::new();
    for scheme in ["quadratic", "linear"] {
        let of: Vec<&QaRow> = data.iter().filter(|r| r.scheme == scheme).collect();
        let mut beat = 0;
        for r in &of {
            if r.p_success > baseline(&corpus, &r.instance_id)? {
                beat += 1;
            }
        }
        let frac = beat as f64 / of.len() as f64;
        ensure(frac >= 0.95, || format!("{scheme}: beats random guessing on {beat}/{}", of.len()))?;
        let ps: Vec<f64> = of.iter().map(|r| r.p_success).collect();
        let pf: Vec<f64> = of.iter().map(|r| r.p_feasible).collect();
        medians.insert(scheme, median(&ps));
        report.push(format!("{scheme} beats random {beat}/{}, median P_S {:.3}, P_F {:.3}", of.len(), median(&ps), median(&pf)));
    }
    let table = harness(summarize(&dir.path().join(QA_METRICS_FILE)))?;
    for line in &table {
        println!(
            "    summary {:<9} n_p = {:<2} count {:<3} P_S median {:.3} [{:.3}, {:.3}]  P_F median {:.3} [{:.3}, {:.3}]",
            line.scheme,
            line.n_products,
            line.count,
            line.p_success_median,
            line.p_success_p05,
            line.p_success_p95,
            line.p_feasible_median,
            line.p_feasible_p05,
            line.p_feasible_p95
        );
    }
    let ordering = if medians["linear"] >= medians["quadratic"] { "linear ≥ quadratic" } else { "linear < quadratic" };
    Ok(format!("{}; {} linear runs skipped; median ordering {ordering}", report.join("; "), manifest.skipped.len()))
}

fn dense_qaoa_p1(energies: &[f64], n: usize, gamma: f64, beta: f64) -> Vec<Complex64> {
    let dim = 1usize << n;
    let amp = 1.0 / (dim as f64).sqrt();
    let phased: Vec<Complex64> = energies.iter().map(|&e| Complex64::from_polar(amp, -gamma * e)).collect();
    let (c, s) = (Complex64::new(beta.cos(), 0.0), Complex64::new(0.0, beta.sin()));
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|col| {
                    let entry = (0..n).fold(Complex64::new(1.0, 0.0), |acc, i| {
                        acc * if (r >> i & 1) == (col >> i & 1) { c } else { s }
                    });
                    entry * phased[col]
                })
                .sum()
        })
        .collect()
}

fn random_model(n: usize, rng: &mut ChaCha8Rng) -> Result<IsingModel, String> {
    let mut m = IsingModel::new(n);
    for i in 0..n {
        core(m.add_field(i, rng.gen_range(-1.0..1.0)))?;
        for j in i + 1..n {
            core(m.add_coupling(i, j, rng.gen_range(-1.0..1.0)))?;
        }
    }
    Ok(m)
}

fn c9_qaoa() -> Outcome {
    let corpus = single_corpus();
    let inst = harness(corpus.load_id("6_0"))?;
    let s = inst.as_single().ok_or("6_0 is not single-quarter")?;
    let (penalized, set) = penalized_model(s, Penalty::Quadratic(2.0))?;
    let (base, _) = core(s.build())?;
    let exact = core(brute_force(&base, &set))?;
    let psi = core(qaoa_state(&penalized.to_ising(), &core(QaoaParams::zeros(8))?))?;
    let p0 = core(measure_metrics(&psi, &exact))?.p_success;
    let guess = baseline(&corpus, "6_0")?;
    ensure((p0 - guess).abs() <= 1e-15, || format!("γ = β = 0 gave P_S = {p0}, expected {guess}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for n in 1..=4 {
        for _ in 0..5 {
            let m = random_model(n, &mut rng)?;
            let energies: Vec<f64> = (0..1u64 << n).map(|k| m.energy_index(k)).collect();
            let (gamma, beta) = (rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
            let got = core(qaoa_state(&m, &core(QaoaParams::new(vec![gamma], vec![beta]))?))?;
            let want = dense_qaoa_p1(&energies, n, gamma, beta);
            for (g, w) in got.amplitudes().iter().zip(&want) {
                worst = worst.max((g - w).norm());
            }
        }
    }
    ensure(worst <= 1e-10, || format!("p = 1 state differs from the dense oracle by {worst:e}"))?;

    let m = random_model(4, &mut rng)?;
    let sched = core(AnnealSchedule::linear(5.0))?;
    let qa = core(anneal_converged(&m, &sched, None, 1e-10))?.state;
    let mut distances = Vec::new();
    for p in [4, 16, 64] {
        let psi: Statevector = core(qaoa_state(&m, &core(schedule_angles(&sched, p))?))?;
        distances.push(core(psi.distance(&qa))?);
    }
    ensure(distances.windows(2).all(|d| d[1] < d[0]), || format!("distance to the anneal not decreasing: {distances:?}"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = config(&[6], None, SINGLE_DIR, dir.path());
    cfg.qaoa.layers = 8;
    cfg.qaoa.restarts = 10;
    cfg.qaoa.shots_optimize = ShotSetting::Count(1000);
    let manifest = run(ExperimentKind::QaoaCompare, &cfg)?;
    let data: Vec<QaoaRow> = rows(dir.path(), QAOA_METRICS_FILE)?;
    let mut beat = 0;
    for r in &data {
        let g = baseline(&corpus, &r.instance_id)?;
        ensure(r.p_success > g, || format!("{} {}: P_S {} ≤ random {g}", r.instance_id, r.scheme, r.p_success))?;
        beat += 1;
    }
    ensure(beat > 0, || "no QAOA rows".into())?;
    let med = |scheme: &str| median(&data.iter().filter(|r| r.scheme == scheme).map(|r| r.p_success).collect::<Vec<_>>());
    Ok(format!(
        "zero angles exact; dense oracle {worst:.1e}; QA distance {:.3} > {:.3} > {:.3}; {beat}/{} runs beat random ({} instances, {} linear skipped), median P_S quadratic {:.3} linear {:.3}",
        distances[0],
        distances[1],
        distances[2],
        data.len(),
        manifest.instances.len(),
        manifest.skipped.len(),
        med("quadratic"),
        med("linear")
    ))
}

fn c10_sweep() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = config(&[8], Some(20), SINGLE_DIR, dir.path());
    cfg.anneal.t_f = 10.0;
    run(ExperimentKind::Alpha2Sweep, &cfg)?;
    let data: Vec<QaRow> = rows(dir.path(), QA_METRICS_FILE)?;
    let grid = &cfg.penalty.alpha2_grid;
    let mut by_instance: BTreeMap<&str, Vec<&QaRow>> = BTreeMap::new();
    for r in &data {
        by_instance.entry(&r.instance_id).or_default().push(r);
    }
    ensure(by_instance.len() == 20, || format!("{} instances swept", by_instance.len()))?;
    let mut ps = vec![0.0; grid.len()];
    let mut pf = vec![0.0; grid.len()];
    for runs in by_instance.values() {
        ensure(runs.len() == grid.len(), || "incomplete sweep".into())?;
        let peak = runs.iter().map(|r| r.p_success).fold(0.0, f64::max);
        for (k, r) in runs.iter().enumerate() {
            ensure(r.alpha == grid[k], || "sweep rows out of grid order".into())?;
            ps[k] += r.p_success / peak / 20.0;
            pf[k] += r.p_feasible / 20.0;
        }
    }
    let last = grid.len() - 1;
    let top = (0..grid.len()).max_by(|&i, &j| ps[i].total_cmp(&ps[j])).unwrap_or(0);
    let pf_max = pf.iter().cloned().fold(0.0, f64::max);
    ensure(top != 0 && top != last && ps[top] > ps[0] && ps[top] > ps[last], || {
        format!("normalized P_S has no interior peak: {ps:?}")
    })?;
    ensure(pf[last] > pf[0] && pf[last] >= 0.8 * pf_max, || format!("P_F does not stay elevated: {pf:?}"))?;
    Ok(format!(
        "normalized P_S {:.3} → peak {:.3} at α₂ = {} → {:.3}; P_F {:.3} → {:.3} (max {:.3})",
        ps[0], ps[top], grid[top], ps[last], pf[0], pf[last], pf_max
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("conversion exactness", c1_conversion),
        ("penalty correctness", c2_penalties),
        ("monotone weight structure", c3_monotone),
        ("α₁ monotonicity and search", c4_alpha1),
        ("grid-scan dichotomy", c5_grid),
        ("QA simulator validity", c6_qa),
        ("normalization-ratio trend", c7_norm_ratio),
        ("QA penalty comparison pipeline", c8_qa_pipeline),
        ("QAOA validity and pipeline", c9_qaoa),
        ("α₂ sweep shape", c10_sweep),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}: {name}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label} ({secs:.1} s): {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL {label} ({secs:.1} s): {why}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
