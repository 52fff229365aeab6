//! Model selection for the number of groups `k` and shapes `s`.

use super::greedy::run_greedy;
use super::merge::{cluster_log_likelihood, MergePath};
use super::spectral::{balanced_cut, spectral_order_from};
use super::stats::BlockStats;
use super::{FitConfig, ShapeMap};
use crate::decoration::OneHotTensor;
use crate::error::{Error, Result};
use crate::parallel::{self, Execution};
use crate::rng;

/// Probabilities are clamped to `[LIKELIHOOD_FLOOR, 1]` before taking logs.
pub const LIKELIHOOD_FLOOR: f64 = 1e-10;

/// `-2 loglik + s (L - 1) log(n(n-1)/2)`.
pub fn bic(log_likelihood: f64, s: usize, decorations: usize, n: usize) -> f64 {
    let pairs = (n * (n - 1)) as f64 / 2.0;
    -2.0 * log_likelihood + (s * (decorations - 1)) as f64 * pairs.ln()
}

/// Index of the path entry with minimal BIC, ties to the smaller `s`.
pub fn select_s_bic(path: &MergePath) -> usize {
    let (n, len) = (path.n(), path.decorations());
    let mut best = (f64::INFINITY, 0);
    for (idx, e) in path.entries().iter().enumerate() {
        let score = bic(e.log_likelihood, e.s, len, n);
        // entries run from large to small s, so `<=` prefers smaller s
        if score <= best.0 {
            best = (score, idx);
        }
    }
    best.1
}

/// `ceil(n^(1/(alpha+1)))`.
pub fn rate_rule_k(n: usize, alpha: f64) -> usize {
    let r = (n as f64).powf(1.0 / (alpha + 1.0));
    // absorb representation error on exact powers, e.g. 100^(1/2)
    ((r - 1e-9).ceil() as usize).max(1)
}

/// Largest `k` keeping at least two nodes per group.
pub(crate) fn max_groups(n: usize) -> usize {
    (n / 2).max(1)
}

pub fn select_k(x: &OneHotTensor, config: &FitConfig) -> Result<usize> {
    select_k_with(x, config, Execution::default())
}

/// `k` from the smoothness rule when `alpha_hint` is set, otherwise the BIC
/// minimizer of the full block model over `k = 2..=ceil(2 sqrt(n))`.
pub fn select_k_with(x: &OneHotTensor, config: &FitConfig, exec: Execution) -> Result<usize> {
    let n = x.n();
    if n < 4 {
        return Err(Error::GridEmpty(n));
    }
    if let Some(alpha) = config.alpha_hint {
        return Ok(rate_rule_k(n, alpha).min(max_groups(n)));
    }
    let data = x.labels()?;
    let len = x.decorations();
    let top = ((2.0 * (n as f64).sqrt()).ceil() as usize).min(max_groups(n));
    let grid: Vec<usize> = (2..=top).collect();
    if grid.is_empty() {
        return Err(Error::GridEmpty(n));
    }
    let order = spectral_order_from(&data, n);
    let scores = parallel::map(exec, &grid, |&k| -> Result<f64> {
        let start = balanced_cut(&order, k)?;
        let map = ShapeMap::full_blocks(k);
        let seed = rng::derive_seed(config.seed, &[0x6b, k as u64]);
        let out = run_greedy(&data, n, len, start, &map, config.max_sweeps, config.tolerance, seed, |_, _| {});
        let stats = BlockStats::compute(&data, n, len, &out.node_labels, k);
        let (sums, counts) = stats.shape_totals(&map);
        let ll: f64 = sums
            .chunks(len)
            .zip(&counts)
            .map(|(row, &m)| cluster_log_likelihood(row, m))
            .sum();
        Ok(bic(ll, map.s(), len, n))
    });
    let mut best = (f64::INFINITY, grid[0]);
    for (&k, score) in grid.iter().zip(scores) {
        let score = score?;
        if score < best.0 {
            best = (score, k);
        }
    }
    Ok(best.1)
}
