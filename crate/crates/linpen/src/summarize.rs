//! Per-scheme, per-size medians and percentile bands of metric CSVs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiments::{QAOA_METRICS_FILE, QA_METRICS_FILE};

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub n_products: usize,
    pub count: usize,
    pub p_success_median: f64,
    pub p_success_p05: f64,
    pub p_success_p95: f64,
    pub p_feasible_median: f64,
    pub p_feasible_p05: f64,
    pub p_feasible_p95: f64,
}

/// Linearly interpolated percentile of sorted data, `q ∈ [0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

fn n_products_of(id: &str) -> Option<usize> {
    id.split_once('_').and_then(|(n, _)| n.parse().ok())
}

/// Groups rows of a metrics CSV (columns `instance_id`, `scheme`,
/// `p_success`, `p_feasible`; an `n_products` column is used if present,
/// otherwise the size is read from the `"{n_p}_{k}"` id).
pub fn summarize(path: &Path) -> Result<Vec<SummaryRow>> {
    let path = &metrics_file(path)?;
    let schema = |message: String| HarnessError::Schema { path: path.to_path_buf(), message };
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(id_col), Some(scheme_col), Some(ps_col), Some(pf_col)) =
        (col("instance_id"), col("scheme"), col("p_success"), col("p_feasible"))
    else {
        return Err(schema("need columns instance_id, scheme, p_success, p_feasible".into()));
    };
    let np_col = col("n_products");
    let mut groups: BTreeMap<(String, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = |c: usize| record.get(c).unwrap_or("");
        let number = |c: usize| -> Result<f64> {
            field(c).parse().map_err(|_| schema(format!("row {}: {:?} is not a number", line + 1, field(c))))
        };
        let id = field(id_col);
        let n = match np_col {
            Some(c) => field(c).parse().ok(),
            None => n_products_of(id),
        }
        .ok_or_else(|| schema(format!("row {}: cannot tell the size of {id:?}", line + 1)))?;
        let g = groups.entry((field(scheme_col).to_string(), n)).or_default();
        g.0.push(number(ps_col)?);
        g.1.push(number(pf_col)?);
    }
    Ok(groups
        .into_iter()
        .map(|((scheme, n_products), (mut ps, mut pf))| {
            ps.sort_by(f64::total_cmp);
            pf.sort_by(f64::total_cmp);
            SummaryRow {
                scheme,
                n_products,
                count: ps.len(),
                p_success_median: percentile(&ps, 0.5),
                p_success_p05: percentile(&ps, 0.05),
                p_success_p95: percentile(&ps, 0.95),
                p_feasible_median: percentile(&pf, 0.5),
                p_feasible_p05: percentile(&pf, 0.05),
                p_feasible_p95: percentile(&pf, 0.95),
            }
        })
        .collect())
}

/// `path` itself, or for a results directory the metrics CSV it contains.
pub fn metrics_file(path: &Path) -> Result<PathBuf> {
    if !path.is_dir() {
        return Ok(path.to_path_buf());
    }
    [QA_METRICS_FILE, QAOA_METRICS_FILE]
        .iter()
        .map(|name| path.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| HarnessError::Schema {
            path: path.to_path_buf(),
            message: format!("no {QA_METRICS_FILE} or {QAOA_METRICS_FILE} in this directory"),
        })
}

pub fn write_summary(path: &Path, out: &Path) -> Result<Vec<SummaryRow>> {
    let rows = summarize(path)?;
    let mut w = csv::Writer::from_path(out)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| HarnessError::io(out, e))?;
    Ok(rows)
}
