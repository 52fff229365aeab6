//! Greedy label switching between balanced groups.

use super::stats::SwapState;
use super::{check_balanced, FitConfig, ShapeMap};
use crate::decoration::OneHotTensor;
use crate::error::{Error, Result};
use crate::rng;

/// Gains at or below this are treated as rounding noise, so exchanges that
/// leave the objective unchanged never cycle.
const MIN_GAIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyOutcome {
    pub node_labels: Vec<usize>,
    pub rss: f64,
    /// RSS before the first sweep and after every sweep.
    pub trace: Vec<f64>,
    pub accepted: usize,
    pub sweeps: usize,
}

pub fn greedy_swaps(
    x: &OneHotTensor,
    node_labels: &[usize],
    shape_map: &ShapeMap,
    config: &FitConfig,
) -> Result<Vec<usize>> {
    greedy_swaps_observed(x, node_labels, shape_map, config, |_, _| {}).map(|o| o.node_labels)
}

/// Like [`greedy_swaps`], calling `observer(labels, rss)` after every
/// accepted exchange with the incrementally tracked RSS.
pub fn greedy_swaps_observed<F>(
    x: &OneHotTensor,
    node_labels: &[usize],
    shape_map: &ShapeMap,
    config: &FitConfig,
    observer: F,
) -> Result<GreedyOutcome>
where
    F: FnMut(&[usize], f64),
{
    let n = x.n();
    if node_labels.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {n} nodes",
            node_labels.len()
        )));
    }
    check_balanced(node_labels, shape_map.k())?;
    let data = x.labels()?;
    let counts = super::stats::BlockStats::compute(&data, n, x.decorations(), node_labels, shape_map.k())
        .shape_totals(shape_map)
        .1;
    if let Some(c) = counts.iter().position(|&m| m == 0) {
        return Err(Error::EmptyShape(c));
    }
    Ok(run_greedy(
        &data,
        n,
        x.decorations(),
        node_labels.to_vec(),
        shape_map,
        config.max_sweeps,
        config.tolerance,
        config.seed,
        observer,
    ))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn run_greedy<F>(
    data: &[u16],
    n: usize,
    len: usize,
    labels: Vec<usize>,
    map: &ShapeMap,
    max_sweeps: usize,
    tolerance: f64,
    seed: u64,
    mut observer: F,
) -> GreedyOutcome
where
    F: FnMut(&[usize], f64),
{
    let threshold = tolerance.max(MIN_GAIN);
    let mut state = SwapState::new(data, n, len, labels, map);
    let mut rng = rng::seeded(seed);
    let mut trace = vec![state.rss()];
    let mut accepted = 0;
    let mut sweeps = 0;
    let mut pairs = Vec::new();
    while sweeps < max_sweeps {
        sweeps += 1;
        pairs.clear();
        for i in 0..n {
            for j in i + 1..n {
                if state.labels[i] != state.labels[j] {
                    pairs.push((i as u32, j as u32));
                }
            }
        }
        rng::shuffle(&mut rng, &mut pairs);
        let mut changed = false;
        for &(i, j) in &pairs {
            let (i, j) = (i as usize, j as usize);
            if state.labels[i] == state.labels[j] {
                continue;
            }
            let gain = state.swap_gain(i, j);
            if gain > threshold {
                state.apply_swap(i, j, gain);
                accepted += 1;
                changed = true;
                observer(&state.labels, state.rss());
            }
        }
        trace.push(state.rss());
        if !changed {
            break;
        }
    }
    GreedyOutcome {
        rss: state.rss(),
        node_labels: state.labels,
        trace,
        accepted,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoration::{encode_one_hot, DecoratedGraph, DecorationSpace};
    use crate::estimator::{objective, Assignment};
    use crate::rng::seeded;
    use rand::Rng;

    fn random_tensor(n: usize, len: usize, seed: u64) -> OneHotTensor {
        let mut rng = seeded(seed);
        let g = DecoratedGraph::from_upper(DecorationSpace::indexed(len).unwrap(), n, |_, _| {
            rng.random_range(0..len)
        })
        .unwrap();
        encode_one_hot(&g)
    }

    /// All balanced 2-partitions of 8 nodes with node 0 in group 0.
    fn balanced_partitions_of_8() -> Vec<Vec<usize>> {
        (0u32..256)
            .filter(|m| m.count_ones() == 4 && m & 1 == 0)
            .map(|m| (0..8).map(|i| (m >> i & 1) as usize).collect())
            .collect()
    }

    fn config(seed: u64) -> FitConfig {
        FitConfig {
            seed,
            ..FitConfig::default()
        }
    }

    #[test]
    fn there_are_35_partitions() {
        assert_eq!(balanced_partitions_of_8().len(), 35);
    }

    #[test]
    fn exhaustive_minimum_is_reached() {
        let map = ShapeMap::full_blocks(2);
        for seed in 0..10 {
            let x = random_tensor(8, 3, seed);
            let parts = balanced_partitions_of_8();
            let exhaustive = parts
                .iter()
                .map(|p| objective(&x, &Assignment::new(p.clone(), map.clone()).unwrap()).unwrap())
                .fold(f64::INFINITY, f64::min);
            let best = parts
                .iter()
                .map(|p| {
                    let out = greedy_swaps(&x, p, &map, &config(seed)).unwrap();
                    objective(&x, &Assignment::new(out, map.clone()).unwrap()).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((best - exhaustive).abs() < 1e-9, "seed {seed}: {best} vs {exhaustive}");
        }
    }

    #[test]
    fn optimum_start_accepts_nothing() {
        let map = ShapeMap::full_blocks(2);
        let x = random_tensor(8, 2, 77);
        let best = balanced_partitions_of_8()
            .into_iter()
            .min_by(|a, b| {
                let fa = objective(&x, &Assignment::new(a.clone(), map.clone()).unwrap()).unwrap();
                let fb = objective(&x, &Assignment::new(b.clone(), map.clone()).unwrap()).unwrap();
                fa.total_cmp(&fb)
            })
            .unwrap();
        let out = greedy_swaps_observed(&x, &best, &map, &config(1), |_, _| {}).unwrap();
        assert_eq!(out.accepted, 0);
        assert_eq!(out.node_labels, best);
    }

    #[test]
    fn incremental_rss_matches_recomputation() {
        let x = random_tensor(24, 4, 5);
        let map = ShapeMap::from_rows(&[vec![0, 1, 1], vec![1, 2, 3], vec![1, 3, 0]]).unwrap();
        let start: Vec<usize> = (0..24).map(|i| i % 3).collect();
        let mut checks = 0;
        let mut last = f64::INFINITY;
        let out = greedy_swaps_observed(&x, &start, &map, &config(3), |labels, rss| {
            let a = Assignment::new(labels.to_vec(), map.clone()).unwrap();
            let exact = objective(&x, &a).unwrap();
            assert!((exact - rss).abs() < 1e-7, "{exact} vs {rss}");
            assert!(rss < last);
            last = rss;
            checks += 1;
        })
        .unwrap();
        assert!(checks > 0);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(out.trace[0], objective(&x, &Assignment::new(start, map.clone()).unwrap()).unwrap());
    }

    #[test]
    fn same_seed_same_result() {
        let x = random_tensor(30, 3, 9);
        let map = ShapeMap::full_blocks(3);
        let start: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let a = greedy_swaps(&x, &start, &map, &config(4)).unwrap();
        let b = greedy_swaps(&x, &start, &map, &config(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_unbalanced_start() {
        let x = random_tensor(6, 2, 0);
        let map = ShapeMap::full_blocks(2);
        assert!(greedy_swaps(&x, &[0, 0, 0, 0, 1, 1], &map, &config(0)).is_err());
    }
}
