//! Brute-force reference computations shared by the integration tests. They
//! work on raw matrices and bit masks so they share no code with the crates
//! under test.

#![allow(dead_code)]

use std::path::PathBuf;

use linpen::files::{Corpus, SINGLE_DIR, TWO_QUARTER_DIR};

pub const TOL: f64 = 1e-9;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn shipped_corpus() -> PathBuf {
    workspace_root().join("corpus")
}

pub fn single_corpus() -> Corpus {
    Corpus::open(&shipped_corpus().join(SINGLE_DIR)).expect("shipped single-quarter corpus")
}

pub fn two_quarter_corpus() -> Corpus {
    Corpus::open(&shipped_corpus().join(TWO_QUARTER_DIR)).expect("shipped two-quarter corpus")
}

pub fn weight(k: u64) -> usize {
    k.count_ones() as usize
}

pub fn bit(k: u64, i: usize) -> bool {
    k >> i & 1 == 1
}

/// `Σ_{i≠j} C_ij x_i x_j` for the products set in `k`, starting at bit `shift`.
pub fn cannibalization(c: &[Vec<f64>], k: u64, shift: usize) -> f64 {
    let mut total = 0.0;
    for (i, row) in c.iter().enumerate().filter(|(i, _)| bit(k, shift + i)) {
        for (j, v) in row.iter().enumerate() {
            if j != i && bit(k, shift + j) {
                total += v;
            }
        }
    }
    total
}

/// Two-quarter objective with quarter `q` of product `i` at bit `q·n + i`.
pub fn two_quarter_objective(c: &[Vec<f64>], lambda: [f64; 2], k: u64) -> f64 {
    lambda[0] * cannibalization(c, k, 0) + lambda[1] * cannibalization(c, k, c.len())
}

/// Weight of the bits `[from, from + len)`.
pub fn block_weight(k: u64, from: usize, len: usize) -> usize {
    weight(k >> from & ((1u64 << len) - 1))
}

/// Minimum of `f` over `0..2^n` and every index within [`TOL`] of it.
pub fn argmins(n: usize, f: impl Fn(u64) -> f64) -> (f64, Vec<u64>) {
    let values: Vec<f64> = (0..1u64 << n).map(&f).collect();
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let at = (0..1u64 << n).filter(|&k| values[k as usize] <= best + TOL).collect();
    (best, at)
}

/// `min{ f(k) : popcount(k) = w }` for `w = 0..=n`.
pub fn weight_minima(n: usize, f: impl Fn(u64) -> f64) -> Vec<f64> {
    let mut m = vec![f64::INFINITY; n + 1];
    for k in 0..1u64 << n {
        let w = weight(k);
        m[w] = m[w].min(f(k));
    }
    m
}

/// Whether some linear strength makes `a` the only minimizing weight of
/// `m_w + α (w − a)`: the largest left slope into `a` must lie strictly
/// below the smallest right slope out of it.
pub fn window_exists(minima: &[f64], a: usize) -> bool {
    let left = (0..a).map(|w| (minima[a] - minima[w]) / (a - w) as f64).fold(f64::NEG_INFINITY, f64::max);
    let right =
        (a + 1..minima.len()).map(|w| (minima[w] - minima[a]) / (w - a) as f64).fold(f64::INFINITY, f64::min);
    left + TOL < right
}

/// `|X*|`: assignments of weight `a` attaining the constrained optimum.
pub fn optimal_count(n: usize, a: usize, f: impl Fn(u64) -> f64) -> usize {
    let best = (0..1u64 << n).filter(|&k| weight(k) == a).map(&f).fold(f64::INFINITY, f64::min);
    (0..1u64 << n).filter(|&k| weight(k) == a && f(k) <= best + TOL).count()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}
