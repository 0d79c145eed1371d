//! Experiment configuration, read from TOML.
//!
//! Every table is optional and falls back to the defaults below. A minimal
//! file selecting instances is enough for most experiments:
//!
//! ```toml
//! kind = "qa-compare"          # optional; the subcommand decides otherwise
//! seed = 7                     # α₁ sampling and QAOA restarts
//! corpus = "corpus/single"     # optional; --corpus overrides
//! output = "results/qa"        # optional; --out overrides
//!
//! [instances]
//! ids = ["8_0", "8_1"]         # explicit ids, or:
//! sizes = [6, 8]               # every instance of these sizes...
//! count = 50                   # ...keeping the first `count` of each
//!
//! [penalty]
//! alpha2 = 2.0                 # quadratic strength on budget constraints
//! alpha2_grid = [1.0, 2.0, 4.0]
//! alpha1_grid = { start = -3.0, end = 0.0, points = 61 }
//! overlap_alpha2 = 2.0         # quadratic strength on x_{i,1} x_{i,2}
//! mixed_alpha2 = 2.0           # quarter-2 strength in the mixed search
//! precision = 1e-5
//!
//! [anneal]
//! t_f = 10.0
//! steps = 256                  # omit to double until converged
//! coupling_bound = 1.0
//! field_bound = 3.0
//! step_tol = 1e-6
//!
//! [qaoa]
//! layers = 8
//! shots_optimize = 1000        # or "exact"
//! shots_final = "exact"
//! max_iterations = 100
//! restarts = 10
//! selection = "success-probability"   # or "mean-objective"
//!
//! [generate]                   # corpus generation only
//! sizes = [6, 7, 8, 9, 10, 11, 12]
//! two_quarter_sizes = [8]
//! count = 100
//! seed_offset = 0
//! budget = 3
//! lambda = [1.5, 1.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use linpen_core::anneal::QaConfig;
use linpen_core::qaoa::RestartSelection;
use linpen_core::search::uniform_grid;
use linpen_core::{QaoaRunConfig, Shots};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::files::CorpusSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GenerateCorpus,
    WeightProfile,
    Alpha2Sweep,
    Alpha1Scan,
    GridScan,
    MixedSearch,
    NormRatio,
    QaCompare,
    QaoaCompare,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GenerateCorpus => "generate-corpus",
            ExperimentKind::WeightProfile => "weight-profile",
            ExperimentKind::Alpha2Sweep => "alpha2-sweep",
            ExperimentKind::Alpha1Scan => "alpha1-scan",
            ExperimentKind::GridScan => "grid-scan",
            ExperimentKind::MixedSearch => "mixed-search",
            ExperimentKind::NormRatio => "norm-ratio",
            ExperimentKind::QaCompare => "qa-compare",
            ExperimentKind::QaoaCompare => "qaoa-compare",
        }
    }

    /// Whether the experiment reads two-quarter instances.
    pub fn uses_two_quarter(self) -> bool {
        matches!(self, ExperimentKind::GridScan | ExperimentKind::MixedSearch)
    }

    /// Corpus directory used when neither the config nor the command line names one.
    pub fn default_corpus(self) -> &'static str {
        if self.uses_two_quarter() {
            "corpus/two_quarter"
        } else {
            "corpus/single"
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstanceSelector {
    pub ids: Vec<String>,
    pub sizes: Vec<usize>,
    pub count: Option<usize>,
}

impl InstanceSelector {
    pub fn is_empty(&self) -> bool {
        self.ids.is_empty() && self.sizes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        uniform_grid(self.start, self.end, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltyConfig {
    pub alpha2: f64,
    pub alpha2_grid: Vec<f64>,
    pub alpha1_grid: GridAxis,
    pub overlap_alpha2: f64,
    pub mixed_alpha2: f64,
    pub precision: f64,
    /// Also anneal at every point of an α₁ scan.
    pub scan_anneal: bool,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig {
            alpha2: 2.0,
            alpha2_grid: (1..=32).map(|k| 0.25 * k as f64).collect(),
            alpha1_grid: GridAxis { start: -3.0, end: 0.0, points: 61 },
            overlap_alpha2: 2.0,
            mixed_alpha2: 2.0,
            precision: linpen_core::search::DEFAULT_PRECISION,
            scan_anneal: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnealConfig {
    pub t_f: f64,
    pub steps: Option<usize>,
    pub coupling_bound: f64,
    pub field_bound: f64,
    pub step_tol: f64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        let d = QaConfig::default();
        AnnealConfig {
            t_f: d.t_f,
            steps: d.steps,
            coupling_bound: d.coupling_bound,
            field_bound: d.field_bound,
            step_tol: d.step_tol,
        }
    }
}

impl AnnealConfig {
    pub fn to_core(&self) -> QaConfig {
        QaConfig {
            t_f: self.t_f,
            steps: self.steps,
            coupling_bound: self.coupling_bound,
            field_bound: self.field_bound,
            step_tol: self.step_tol,
        }
    }
}

/// A shot count or the word `"exact"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShotSetting {
    Count(u64),
    Word(String),
}

impl ShotSetting {
    fn to_core(&self, field: &str) -> Result<Shots> {
        match self {
            ShotSetting::Count(0) => Err(HarnessError::config(field, "shot count must be positive")),
            ShotSetting::Count(n) => Ok(Shots::Sampled(*n)),
            ShotSetting::Word(w) if w == "exact" => Ok(Shots::Exact),
            ShotSetting::Word(w) => Err(HarnessError::config(field, format!("expected a count or \"exact\", got {w:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionSetting {
    SuccessProbability,
    MeanObjective,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QaoaConfig {
    pub layers: usize,
    pub shots_optimize: ShotSetting,
    pub shots_final: ShotSetting,
    pub max_iterations: usize,
    pub restarts: usize,
    pub selection: SelectionSetting,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        let d = QaoaRunConfig::desk();
        QaoaConfig {
            layers: d.layers,
            shots_optimize: ShotSetting::Count(1000),
            shots_final: ShotSetting::Word("exact".into()),
            max_iterations: d.max_iterations,
            restarts: d.restarts,
            selection: SelectionSetting::SuccessProbability,
        }
    }
}

impl QaoaConfig {
    pub fn to_core(&self, rng_seed: u64) -> Result<QaoaRunConfig> {
        let cfg = QaoaRunConfig {
            layers: self.layers,
            shots_optimize: self.shots_optimize.to_core("qaoa.shots_optimize")?,
            shots_final: self.shots_final.to_core("qaoa.shots_final")?,
            max_iterations: self.max_iterations,
            restarts: self.restarts,
            rng_seed,
            selection: match self.selection {
                SelectionSetting::SuccessProbability => RestartSelection::SuccessProbability,
                SelectionSetting::MeanObjective => RestartSelection::MeanObjective,
            },
        };
        if self.layers == 0 {
            return Err(HarnessError::config("qaoa.layers", "must be positive"));
        }
        if self.restarts == 0 {
            return Err(HarnessError::config("qaoa.restarts", "must be positive"));
        }
        Ok(cfg)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub corpus: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub instances: InstanceSelector,
    pub penalty: PenaltyConfig,
    pub anneal: AnnealConfig,
    pub qaoa: QaoaConfig,
    pub generate: CorpusSpec,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::config(field, format!("must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_else(|| "<file>".into());
            HarnessError::config(field, e.message().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config { field, message } => {
                HarnessError::config(format!("{}: {field}", path.display()), message)
            }
            other => other,
        })
    }

    /// Checks the parts of the configuration that `kind` reads.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(HarnessError::config("kind", format!("config is for {k}, but {kind} was requested")));
            }
        }
        if kind == ExperimentKind::GenerateCorpus {
            let g = &self.generate;
            if g.count == 0 {
                return Err(HarnessError::config("generate.count", "must be positive"));
            }
            if g.sizes.is_empty() && g.two_quarter_sizes.is_empty() {
                return Err(HarnessError::config("generate.sizes", "no sizes requested"));
            }
            if let Some(&n) = g.sizes.iter().chain(&g.two_quarter_sizes).find(|&&n| n < 2) {
                return Err(HarnessError::config("generate.sizes", format!("size {n} is below 2")));
            }
            positive("generate.lambda[0]", g.lambda[0])?;
            positive("generate.lambda[1]", g.lambda[1])?;
            return Ok(());
        }
        if self.instances.is_empty() {
            return Err(HarnessError::config("instances", "no instances selected (set ids or sizes)"));
        }
        if self.instances.count == Some(0) {
            return Err(HarnessError::config("instances.count", "must be positive"));
        }
        let p = &self.penalty;
        positive("penalty.precision", p.precision)?;
        match kind {
            ExperimentKind::Alpha2Sweep => {
                if p.alpha2_grid.is_empty() {
                    return Err(HarnessError::config("penalty.alpha2_grid", "grid is empty"));
                }
                for (i, &a) in p.alpha2_grid.iter().enumerate() {
                    positive(&format!("penalty.alpha2_grid[{i}]"), a)?;
                }
            }
            ExperimentKind::Alpha1Scan | ExperimentKind::GridScan => {
                if p.alpha1_grid.points == 0 {
                    return Err(HarnessError::config("penalty.alpha1_grid.points", "grid is empty"));
                }
                if !(p.alpha1_grid.start.is_finite() && p.alpha1_grid.end.is_finite()) {
                    return Err(HarnessError::config("penalty.alpha1_grid", "bounds must be finite"));
                }
            }
            _ => {}
        }
        if kind.uses_two_quarter() {
            positive("penalty.overlap_alpha2", p.overlap_alpha2)?;
        }
        if kind == ExperimentKind::MixedSearch {
            positive("penalty.mixed_alpha2", p.mixed_alpha2)?;
        }
        if matches!(kind, ExperimentKind::NormRatio | ExperimentKind::QaCompare | ExperimentKind::QaoaCompare) {
            positive("penalty.alpha2", p.alpha2)?;
        }
        if matches!(kind, ExperimentKind::Alpha2Sweep | ExperimentKind::QaCompare | ExperimentKind::NormRatio)
            || (kind == ExperimentKind::Alpha1Scan && p.scan_anneal)
        {
            let a = &self.anneal;
            positive("anneal.t_f", a.t_f)?;
            positive("anneal.coupling_bound", a.coupling_bound)?;
            positive("anneal.field_bound", a.field_bound)?;
            positive("anneal.step_tol", a.step_tol)?;
            if a.steps == Some(0) {
                return Err(HarnessError::config("anneal.steps", "must be positive"));
            }
        }
        if kind == ExperimentKind::QaoaCompare {
            self.qaoa.to_core(self.seed)?;
        }
        Ok(())
    }
}
