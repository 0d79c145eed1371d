//! Experiment pipelines. Each one maps selected corpus instances to CSV rows,
//! in parallel, and writes the rows in corpus order so that output bytes do
//! not depend on scheduling.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use linpen_core::anneal::run_qa;
use linpen_core::exact::{brute_force, min_objective_by_weight};
use linpen_core::penalty::apply_scheme;
use linpen_core::qaoa::run_qaoa_penalized;
use linpen_core::search::{SingleQuarterLandscape, TwoQuarterLandscape};
use linpen_core::{ConstraintSet, Penalty, PenaltyScheme, QuboProblem, SingleQuarterInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, ExperimentKind, InstanceSelector};
use crate::error::{HarnessError, Result};
use crate::files::{Corpus, Instance, ManifestEntry};
use crate::manifest::{InstanceRecord, Note, RunManifest, MANIFEST_NAME};

pub const QA_METRICS_FILE: &str = "qa_metrics.csv";
pub const QAOA_METRICS_FILE: &str = "qaoa_metrics.csv";
pub const QAOA_TRACE_FILE: &str = "qaoa_trace.csv";
pub const PROFILE_FILE: &str = "weight_profile.csv";
pub const SCAN_FILE: &str = "alpha1_scan.csv";
pub const INTERVAL_FILE: &str = "alpha1_intervals.csv";
pub const GRID_FILE: &str = "grid_scan.csv";
pub const GRID_SUMMARY_FILE: &str = "grid_summary.csv";
pub const MIXED_FILE: &str = "mixed_search.csv";
pub const NORM_FILE: &str = "norm_ratio.csv";

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct QaRow {
    pub instance_id: String,
    pub scheme: String,
    pub alpha: f64,
    pub t_f: f64,
    pub steps: usize,
    pub normalization: f64,
    pub p_success: f64,
    pub p_feasible: f64,
}
const QA_HEADER: &[&str] = &["instance_id", "scheme", "alpha", "t_f", "steps", "normalization", "p_success", "p_feasible"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct QaoaRow {
    pub instance_id: String,
    pub scheme: String,
    pub alpha: f64,
    pub p: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub p_success: f64,
    pub p_feasible: f64,
    pub mean_objective: f64,
}
const QAOA_HEADER: &[&str] =
    &["instance_id", "scheme", "alpha", "p", "restarts", "best_restart", "p_success", "p_feasible", "mean_objective"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct TraceRow {
    pub instance_id: String,
    pub scheme: String,
    pub restart: usize,
    pub iteration: usize,
    pub objective_estimate: f64,
}
const TRACE_HEADER: &[&str] = &["instance_id", "scheme", "restart", "iteration", "objective_estimate"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ProfileRow {
    pub instance_id: String,
    pub n_products: usize,
    pub weight: usize,
    pub min_objective: f64,
    pub argmin: String,
}
const PROFILE_HEADER: &[&str] = &["instance_id", "n_products", "weight", "min_objective", "argmin"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ScanRow {
    pub instance_id: String,
    pub alpha1: f64,
    /// Ground-state weights joined by `|`.
    pub weights: String,
    pub boundary: bool,
}
const SCAN_HEADER: &[&str] = &["instance_id", "alpha1", "weights", "boundary"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct IntervalRow {
    pub instance_id: String,
    pub target: usize,
    pub lo: f64,
    pub hi: f64,
    pub found: bool,
    pub oracle_calls: usize,
    pub doubling_calls: usize,
}
const INTERVAL_HEADER: &[&str] = &["instance_id", "target", "lo", "hi", "found", "oracle_calls", "doubling_calls"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct GridRow {
    pub instance_id: String,
    pub alpha1_q1: f64,
    pub alpha1_q2: f64,
    pub w1: usize,
    pub w2: usize,
    pub degenerate: bool,
    pub feasible: bool,
}
const GRID_HEADER: &[&str] = &["instance_id", "alpha1_q1", "alpha1_q2", "w1", "w2", "degenerate", "feasible"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct GridSummaryRow {
    pub instance_id: String,
    pub satisfying_cells: usize,
    /// Whether the satisfying region contains a disc of radius `precision`.
    pub region_exists: bool,
    pub region_radius: Option<f64>,
    pub region_center_q1: Option<f64>,
    pub region_center_q2: Option<f64>,
}
const GRID_SUMMARY_HEADER: &[&str] =
    &["instance_id", "satisfying_cells", "region_exists", "region_radius", "region_center_q1", "region_center_q2"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct MixedRow {
    pub instance_id: String,
    pub alpha2: f64,
    pub overlap_alpha2: f64,
    pub lo: f64,
    pub hi: f64,
    pub found: bool,
    pub oracle_calls: usize,
    /// Constraint labels broken at the target weight, joined by `|`.
    pub violations: String,
}
const MIXED_HEADER: &[&str] =
    &["instance_id", "alpha2", "overlap_alpha2", "lo", "hi", "found", "oracle_calls", "violations"];

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct NormRow {
    pub instance_id: String,
    pub n_products: usize,
    pub alpha2: f64,
    pub alpha1: f64,
    pub n_quadratic: f64,
    pub n_linear: f64,
    pub ratio: f64,
}
const NORM_HEADER: &[&str] = &["instance_id", "n_products", "alpha2", "alpha1", "n_quadratic", "n_linear", "ratio"];

/// Writes `rows` under `header`; the header is written even with no rows.
pub fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv<R: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<R>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<R>, _>>()?)
}

/// `(n_p, index, id)` from ids of the form `"{n_p}_{index}"`.
fn canonical_key(e: &ManifestEntry) -> (usize, u64, String) {
    let index = e.id.rsplit_once('_').and_then(|(_, k)| k.parse().ok()).unwrap_or(u64::MAX);
    (e.n_p, index, e.id.clone())
}

/// Resolves a selector against a corpus, in canonical order.
pub fn select(corpus: &Corpus, sel: &InstanceSelector) -> Result<Vec<ManifestEntry>> {
    if sel.is_empty() {
        return Err(HarnessError::config("instances", "no instances selected (set ids or sizes)"));
    }
    let mut out: Vec<ManifestEntry> = Vec::new();
    for id in &sel.ids {
        let e = corpus
            .entry(id)
            .ok_or_else(|| HarnessError::config("instances.ids", format!("unknown instance id {id}")))?;
        out.push(e.clone());
    }
    for &n in &sel.sizes {
        let mut of_size: Vec<&ManifestEntry> = corpus.entries.iter().filter(|e| e.n_p == n).collect();
        if of_size.is_empty() {
            return Err(HarnessError::config("instances.sizes", format!("corpus has no instances of size {n}")));
        }
        of_size.sort_by_key(|e| canonical_key(e));
        let take = sel.count.unwrap_or(of_size.len());
        out.extend(of_size.into_iter().take(take).cloned());
    }
    out.sort_by_key(canonical_key);
    out.dedup_by(|a, b| a.id == b.id);
    Ok(out)
}

/// Stable 64-bit value derived from an instance id, used as an RNG stream.
pub fn instance_stream(id: &str) -> u64 {
    let d = Sha256::digest(id.as_bytes());
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// Generator for the linear-penalty draw of one instance.
pub fn alpha1_rng(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance_stream(id));
    rng
}

fn single(inst: &Instance) -> Result<&SingleQuarterInstance> {
    inst.as_single().ok_or_else(|| {
        HarnessError::Core(linpen_core::Error::Configuration(format!(
            "{} is a two-quarter instance; this experiment needs single-quarter ones",
            inst.id()
        )))
    })
}

fn budget_scheme(set: &ConstraintSet, penalty: Penalty) -> PenaltyScheme {
    let mut scheme = PenaltyScheme::new();
    for c in set.iter() {
        scheme.set(c.label(), penalty);
    }
    scheme
}

/// Linear strength drawn uniformly from the instance's search window, or
/// `None` if no window was found.
pub fn sample_alpha1(inst: &SingleQuarterInstance, cfg: &ExperimentConfig) -> Result<Option<f64>> {
    let iv = SingleQuarterLandscape::new(inst)?.find_interval(inst.budget, cfg.penalty.precision)?;
    Ok(iv.sample(&mut alpha1_rng(cfg.seed, &inst.id)))
}

struct Prepared {
    base: QuboProblem,
    set: ConstraintSet,
}

fn prepare(inst: &SingleQuarterInstance) -> Result<Prepared> {
    let (base, set) = inst.build()?;
    Ok(Prepared { base, set })
}

fn qa_row(inst: &SingleQuarterInstance, p: &Prepared, scheme: &str, alpha: f64, cfg: &ExperimentConfig) -> Result<QaRow> {
    let penalty = if scheme == "linear" { Penalty::Linear(alpha) } else { Penalty::Quadratic(alpha) };
    let penalized = apply_scheme(&p.base, &p.set, &budget_scheme(&p.set, penalty))?;
    let exact = brute_force(&p.base, &p.set)?;
    let out = run_qa(&penalized, &exact, &cfg.anneal.to_core())?;
    Ok(QaRow {
        instance_id: inst.id.clone(),
        scheme: scheme.into(),
        alpha,
        t_f: cfg.anneal.t_f,
        steps: out.steps,
        normalization: out.metrics.normalization,
        p_success: out.metrics.p_success,
        p_feasible: out.metrics.p_feasible,
    })
}

/// Result of one work item.
enum Outcome<T> {
    Done(T),
    /// Partially done; the note explains what was left out.
    Partial(T, String),
}

/// Summary of a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub instances: usize,
    pub skipped: Vec<Note>,
    pub failed: Vec<Note>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.failed.is_empty() {
            0
        } else {
            1
        }
    }
}

struct Items<T> {
    done: Vec<T>,
    skipped: Vec<Note>,
    failed: Vec<Note>,
}

fn run_items<T: Send>(
    corpus: &Corpus,
    entries: &[ManifestEntry],
    work: impl Fn(&Instance) -> Result<Outcome<T>> + Sync,
) -> Items<T> {
    let results: Vec<(String, Result<Outcome<T>>)> = entries
        .par_iter()
        .map(|e| (e.id.clone(), corpus.load(e).and_then(|inst| work(&inst))))
        .collect();
    let mut items = Items { done: Vec::new(), skipped: Vec::new(), failed: Vec::new() };
    for (id, r) in results {
        match r {
            Ok(Outcome::Done(t)) => items.done.push(t),
            Ok(Outcome::Partial(t, message)) => {
                items.done.push(t);
                items.skipped.push(Note { id, message });
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                items.failed.push(Note { id, message: e.to_string() });
            }
        }
    }
    items
}

/// Output directory and corpus resolved against the experiment's defaults.
pub fn resolve_paths(kind: ExperimentKind, cfg: &ExperimentConfig) -> (PathBuf, PathBuf) {
    let corpus = cfg.corpus.clone().unwrap_or_else(|| PathBuf::from(kind.default_corpus()));
    let out = cfg.output.clone().unwrap_or_else(|| Path::new("results").join(kind.name()));
    (corpus, out)
}

/// Runs one experiment with `jobs` worker threads (0 picks the core count).
pub fn run_experiment(kind: ExperimentKind, cfg: &ExperimentConfig, jobs: usize) -> Result<RunReport> {
    cfg.validate(kind)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::config("--jobs", e.to_string()))?;
    pool.install(|| run_inner(kind, cfg))
}

fn run_inner(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<RunReport> {
    let started = Instant::now();
    let (corpus_dir, out) = resolve_paths(kind, cfg);
    fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;

    if kind == ExperimentKind::GenerateCorpus {
        let (single, two) = cfg.generate.write(&out)?;
        let mut records = Vec::new();
        for c in [&single, &two] {
            for e in &c.entries {
                records.push(InstanceRecord { id: e.id.clone(), file: c.path_of(e), sha256: c.file_hash(e)? });
            }
        }
        let outputs = vec![single.dir.join(crate::files::MANIFEST_FILE), two.dir.join(crate::files::MANIFEST_FILE)];
        return finish(kind, cfg, &out, None, records, outputs, Vec::new(), Vec::new(), started);
    }

    let corpus = Corpus::open(&corpus_dir)
        .map_err(|e| HarnessError::config("corpus", format!("{}: {e}", corpus_dir.display())))?;
    let entries = select(&corpus, &cfg.instances)?;
    let records = entries
        .iter()
        .map(|e| Ok(InstanceRecord { id: e.id.clone(), file: corpus.path_of(e), sha256: corpus.file_hash(e)? }))
        .collect::<Result<Vec<_>>>()?;

    let mut outputs = Vec::new();
    let (skipped, failed) = match kind {
        ExperimentKind::GenerateCorpus => unreachable!("handled above"),
        ExperimentKind::WeightProfile => {
            let items = run_items(&corpus, &entries, |inst| {
                let s = single(inst)?;
                let (base, _) = s.build()?;
                let rows = min_objective_by_weight(&base)?
                    .into_iter()
                    .map(|m| ProfileRow {
                        instance_id: s.id.clone(),
                        n_products: s.n_products(),
                        weight: m.weight,
                        min_objective: m.value,
                        argmin: m.argmin.to_string(),
                    })
                    .collect::<Vec<_>>();
                Ok(Outcome::Done(rows))
            });
            outputs.push(emit(&out, PROFILE_FILE, PROFILE_HEADER, items.done)?);
            (items.skipped, items.failed)
        }
        ExperimentKind::Alpha2Sweep => {
            let items = run_items(&corpus, &entries, |inst| {
                let s = single(inst)?;
                let p = prepare(s)?;
                let rows = cfg
                    .penalty
                    .alpha2_grid
                    .iter()
                    .map(|&a| qa_row(s, &p, "quadratic", a, cfg))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Outcome::Done(rows))
            });
            outputs.push(emit(&out, QA_METRICS_FILE, QA_HEADER, items.done)?);
            (items.skipped, items.failed)
        }
        ExperimentKind::Alpha1Scan => {
            let grid = cfg.penalty.alpha1_grid.values();
            let items = run_items(&corpus, &entries, |inst| {
                let s = single(inst)?;
                let land = SingleQuarterLandscape::new(s)?;
                let scan: Vec<ScanRow> = grid
                    .iter()
                    .map(|&a| {
                        let w = land.ground_weights(a);
                        ScanRow {
                            instance_id: s.id.clone(),
                            alpha1: a,
                            weights: w.as_slice().iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|"),
                            boundary: w.is_boundary(),
                        }
                    })
                    .collect();
                let iv = land.find_interval(s.budget, cfg.penalty.precision)?;
                let interval = IntervalRow {
                    instance_id: s.id.clone(),
                    target: s.budget,
                    lo: iv.lo,
                    hi: iv.hi,
                    found: iv.found,
                    oracle_calls: iv.oracle_calls,
                    doubling_calls: iv.doubling_calls,
                };
                let qa = if cfg.penalty.scan_anneal {
                    let p = prepare(s)?;
                    grid.iter().map(|&a| qa_row(s, &p, "linear", a, cfg)).collect::<Result<Vec<_>>>()?
                } else {
                    Vec::new()
                };
                Ok(Outcome::Done((scan, interval, qa)))
            });
            let mut scan = Vec::new();
            let mut intervals = Vec::new();
            let mut qa = Vec::new();
            for (s, i, q) in items.done {
                scan.extend(s);
                intervals.push(i);
                qa.extend(q);
            }
            outputs.push(write_to(&out, SCAN_FILE, SCAN_HEADER, &scan)?);
            outputs.push(write_to(&out, INTERVAL_FILE, INTERVAL_HEADER, &intervals)?);
            if cfg.penalty.scan_anneal {
                outputs.push(write_to(&out, QA_METRICS_FILE, QA_HEADER, &qa)?);
            }
            (items.skipped, items.failed)
        }
        ExperimentKind::GridScan => {
            let grid = cfg.penalty.alpha1_grid.values();
            let items = run_items(&corpus, &entries, |inst| {
                let t = inst.as_two_quarter().ok_or_else(|| {
                    HarnessError::Core(linpen_core::Error::Configuration(format!(
                        "{} is not a two-quarter instance",
                        inst.id()
                    )))
                })?;
                let land = TwoQuarterLandscape::new(t, cfg.penalty.overlap_alpha2)?;
                let g = land.grid_scan(&grid, &grid);
                let mut rows = Vec::with_capacity(grid.len() * grid.len());
                for (i, row) in g.cells.iter().enumerate() {
                    for (j, c) in row.iter().enumerate() {
                        rows.push(GridRow {
                            instance_id: t.id.clone(),
                            alpha1_q1: g.alpha_q1[i],
                            alpha1_q2: g.alpha_q2[j],
                            w1: c.w1,
                            w2: c.w2,
                            degenerate: c.degenerate,
                            feasible: c.feasible,
                        });
                    }
                }
                let region = land.satisfying_region();
                let summary = GridSummaryRow {
                    instance_id: t.id.clone(),
                    satisfying_cells: g.satisfying.len(),
                    region_exists: region.is_some_and(|r| r.radius >= cfg.penalty.precision),
                    region_radius: region.map(|r| r.radius),
                    region_center_q1: region.map(|r| r.center.0),
                    region_center_q2: region.map(|r| r.center.1),
                };
                Ok(Outcome::Done((rows, summary)))
            });
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for (r, s) in items.done {
                rows.extend(r);
                summary.push(s);
            }
            outputs.push(write_to(&out, GRID_FILE, GRID_HEADER, &rows)?);
            outputs.push(write_to(&out, GRID_SUMMARY_FILE, GRID_SUMMARY_HEADER, &summary)?);
            (items.skipped, items.failed)
        }
        ExperimentKind::MixedSearch => {
            let items = run_items(&corpus, &entries, |inst| {
                let t = inst.as_two_quarter().ok_or_else(|| {
                    HarnessError::Core(linpen_core::Error::Configuration(format!(
                        "{} is not a two-quarter instance",
                        inst.id()
                    )))
                })?;
                let land = TwoQuarterLandscape::new(t, cfg.penalty.overlap_alpha2)?;
                let iv = land.mixed_search(cfg.penalty.mixed_alpha2, cfg.penalty.precision)?;
                let row = MixedRow {
                    instance_id: t.id.clone(),
                    alpha2: cfg.penalty.mixed_alpha2,
                    overlap_alpha2: cfg.penalty.overlap_alpha2,
                    lo: iv.lo,
                    hi: iv.hi,
                    found: iv.found,
                    oracle_calls: iv.oracle_calls,
                    violations: iv.violations.join("|"),
                };
                if iv.found {
                    Ok(Outcome::Done(vec![row]))
                } else {
                    let why = if iv.violations.is_empty() {
                        "target weight skipped".to_string()
                    } else {
                        format!("violates {}", iv.violations.join(", "))
                    };
                    Ok(Outcome::Partial(vec![row], format!("no mixed window: {why}")))
                }
            });
            outputs.push(emit(&out, MIXED_FILE, MIXED_HEADER, items.done)?);
            (items.skipped, items.failed)
        }
        ExperimentKind::NormRatio => {
            let bounds = (cfg.anneal.coupling_bound, cfg.anneal.field_bound);
            let items = run_items(&corpus, &entries, |inst| {
                let s = single(inst)?;
                let Some(alpha1) = sample_alpha1(s, cfg)? else {
                    return Ok(Outcome::Partial(Vec::new(), "no linear window; skipped".into()));
                };
                let p = prepare(s)?;
                let factor = |penalty| -> Result<f64> {
                    let q = apply_scheme(&p.base, &p.set, &budget_scheme(&p.set, penalty))?;
                    Ok(q.to_ising().normalized(bounds.0, bounds.1)?.1.factor)
                };
                let n_quadratic = factor(Penalty::Quadratic(cfg.penalty.alpha2))?;
                let n_linear = factor(Penalty::Linear(alpha1))?;
                Ok(Outcome::Done(vec![NormRow {
                    instance_id: s.id.clone(),
                    n_products: s.n_products(),
                    alpha2: cfg.penalty.alpha2,
                    alpha1,
                    n_quadratic,
                    n_linear,
                    ratio: n_quadratic / n_linear,
                }]))
            });
            outputs.push(emit(&out, NORM_FILE, NORM_HEADER, items.done)?);
            (items.skipped, items.failed)
        }
        ExperimentKind::QaCompare => {
            let items = run_items(&corpus, &entries, |inst| {
                let s = single(inst)?;
                let p = prepare(s)?;
                let mut rows = vec![qa_row(s, &p, "quadratic", cfg.penalty.alpha2, cfg)?];
                match sample_alpha1(s, cfg)? {
                    Some(a) => {
                        rows.push(qa_row(s, &p, "linear", a, cfg)?);
                        Ok(Outcome::Done(rows))
                    }
                    None => Ok(Outcome::Partial(rows, "no linear window; linear run skipped".into())),
                }
            });
            outputs.push(emit(&out, QA_METRICS_FILE, QA_HEADER, items.done)?);
            (items.skipped, items.failed)
        }
        ExperimentKind::QaoaCompare => {
            let items = run_items(&corpus, &entries, |inst| {
                let s = single(inst)?;
                let p = prepare(s)?;
                let target = brute_force(&p.base, &p.set)?;
                let qcfg = cfg.qaoa.to_core(cfg.seed ^ instance_stream(&s.id))?;
                let mut schemes = vec![("quadratic", Penalty::Quadratic(cfg.penalty.alpha2), cfg.penalty.alpha2)];
                let linear = sample_alpha1(s, cfg)?;
                if let Some(a) = linear {
                    schemes.push(("linear", Penalty::Linear(a), a));
                }
                let mut metrics = Vec::new();
                let mut trace = Vec::new();
                for (name, penalty, alpha) in schemes {
                    let penalized = apply_scheme(&p.base, &p.set, &budget_scheme(&p.set, penalty))?;
                    let run = run_qaoa_penalized(&penalized, &target, &qcfg)?;
                    metrics.push(QaoaRow {
                        instance_id: s.id.clone(),
                        scheme: name.into(),
                        alpha,
                        p: qcfg.layers,
                        restarts: qcfg.restarts,
                        best_restart: run.search.best_restart,
                        p_success: run.metrics.p_success,
                        p_feasible: run.metrics.p_feasible,
                        mean_objective: run.mean_objective,
                    });
                    for (k, r) in run.search.restarts.iter().enumerate() {
                        trace.extend(r.trace.iter().map(|t| TraceRow {
                            instance_id: s.id.clone(),
                            scheme: name.into(),
                            restart: k,
                            iteration: t.iteration,
                            objective_estimate: t.value,
                        }));
                    }
                }
                let rows = (metrics, trace);
                Ok(match linear {
                    Some(_) => Outcome::Done(rows),
                    None => Outcome::Partial(rows, "no linear window; linear run skipped".into()),
                })
            });
            let mut metrics = Vec::new();
            let mut trace = Vec::new();
            for (m, t) in items.done {
                metrics.extend(m);
                trace.extend(t);
            }
            outputs.push(write_to(&out, QAOA_METRICS_FILE, QAOA_HEADER, &metrics)?);
            outputs.push(write_to(&out, QAOA_TRACE_FILE, TRACE_HEADER, &trace)?);
            (items.skipped, items.failed)
        }
    };
    finish(kind, cfg, &out, Some(&corpus_dir), records, outputs, skipped, failed, started)
}

fn write_to<R: Serialize>(out: &Path, name: &str, header: &[&str], rows: &[R]) -> Result<PathBuf> {
    let path = out.join(name);
    write_csv(&path, header, rows)?;
    Ok(path)
}

fn emit<R: Serialize>(out: &Path, name: &str, header: &[&str], chunks: Vec<Vec<R>>) -> Result<PathBuf> {
    let rows: Vec<R> = chunks.into_iter().flatten().collect();
    write_to(out, name, header, &rows)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    kind: ExperimentKind,
    cfg: &ExperimentConfig,
    out: &Path,
    corpus: Option<&Path>,
    instances: Vec<InstanceRecord>,
    outputs: Vec<PathBuf>,
    skipped: Vec<Note>,
    failed: Vec<Note>,
    started: Instant,
) -> Result<RunReport> {
    let manifest = RunManifest {
        kind: kind.name().into(),
        config: cfg.clone(),
        corpus: corpus.map(Path::to_path_buf),
        instances: instances.clone(),
        outputs: outputs.clone(),
        skipped: skipped.clone(),
        failed: failed.clone(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    };
    let path = out.join(MANIFEST_NAME);
    manifest.write(&path)?;
    Ok(RunReport { out_dir: out.to_path_buf(), outputs, manifest: path, instances: instances.len(), skipped, failed })
}
