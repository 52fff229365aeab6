//! Least-squares fitting of decorated stochastic shape models.
//!
//! Nodes are split into `k` balanced groups; each unordered pair of groups
//! (a block) is mapped to one of `s` shapes, and every shape carries one
//! probability vector. For a fixed assignment the least-squares parameters
//! are the shape averages of the one-hot tensor, so the search reduces to a
//! combinatorial problem over node labels and block-to-shape maps.

mod fit;
mod greedy;
mod merge;
mod select;
mod spectral;
mod stats;

pub use fit::{estimate_function, fit, fit_with, Fit, FitConfig, FitDocument};
pub use greedy::{greedy_swaps, greedy_swaps_observed, GreedyOutcome};
pub use merge::{merge_path, MergePath, PathEntry};
pub use select::{bic, rate_rule_k, select_k, select_k_with, select_s_bic, LIKELIHOOD_FLOOR};
pub use spectral::{balanced_cut, spectral_init, spectral_order};

use serde::{Deserialize, Serialize};

use crate::decoration::OneHotTensor;
use crate::error::{Error, Result};

/// Symmetric `k x k` map from blocks to shapes `0..s`, every shape used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct ShapeMap {
    k: usize,
    s: usize,
    map: Vec<usize>,
}

impl ShapeMap {
    pub fn from_flat(k: usize, map: Vec<usize>) -> Result<Self> {
        if k == 0 || map.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "shape map for k = {k} needs {} entries, got {}",
                k * k,
                map.len()
            )));
        }
        for g in 0..k {
            for h in 0..k {
                if map[g * k + h] != map[h * k + g] {
                    return Err(Error::InvalidConfig(format!(
                        "shape map not symmetric at ({g}, {h})"
                    )));
                }
            }
        }
        let s = map.iter().max().map_or(0, |&m| m + 1);
        let mut used = vec![false; s];
        map.iter().for_each(|&c| used[c] = true);
        if let Some(c) = used.iter().position(|&u| !u) {
            return Err(Error::EmptyShape(c));
        }
        Ok(Self { k, s, map })
    }

    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("shape map must be square".into()));
        }
        Self::from_flat(k, rows.concat())
    }

    /// One shape per unordered block, numbered row-major over `g <= h`.
    pub fn full_blocks(k: usize) -> Self {
        let mut map = vec![0; k * k];
        let mut c = 0;
        for g in 0..k {
            for h in g..k {
                map[g * k + h] = c;
                map[h * k + g] = c;
                c += 1;
            }
        }
        Self { k, s: c, map }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    #[inline]
    pub fn get(&self, g: usize, h: usize) -> usize {
        self.map[g * self.k + h]
    }

    pub fn flat(&self) -> &[usize] {
        &self.map
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.map.chunks(self.k).map(<[usize]>::to_vec).collect()
    }
}

impl TryFrom<Vec<Vec<usize>>> for ShapeMap {
    type Error = Error;

    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<ShapeMap> for Vec<Vec<usize>> {
    fn from(map: ShapeMap) -> Self {
        map.rows()
    }
}

/// Balanced node-to-group labelling together with a block-to-shape map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    node_labels: Vec<usize>,
    shape_map: ShapeMap,
}

impl Assignment {
    pub fn new(node_labels: Vec<usize>, shape_map: ShapeMap) -> Result<Self> {
        let k = shape_map.k();
        check_balanced(&node_labels, k)?;
        Ok(Self {
            node_labels,
            shape_map,
        })
    }

    pub fn full_blocks(node_labels: Vec<usize>, k: usize) -> Result<Self> {
        Self::new(node_labels, ShapeMap::full_blocks(k))
    }

    pub fn n(&self) -> usize {
        self.node_labels.len()
    }

    pub fn k(&self) -> usize {
        self.shape_map.k()
    }

    pub fn s(&self) -> usize {
        self.shape_map.s()
    }

    pub fn node_labels(&self) -> &[usize] {
        &self.node_labels
    }

    pub fn shape_map(&self) -> &ShapeMap {
        &self.shape_map
    }

    #[inline]
    pub fn shape_of(&self, i: usize, j: usize) -> usize {
        self.shape_map
            .get(self.node_labels[i], self.node_labels[j])
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        group_sizes(&self.node_labels, self.k())
    }

    /// Ordered off-diagonal pair count per shape.
    pub fn shape_counts(&self) -> Vec<u64> {
        let sizes = self.group_sizes();
        let k = self.k();
        let mut counts = vec![0u64; self.s()];
        for g in 0..k {
            for h in 0..k {
                let pairs = if g == h {
                    sizes[g] * sizes[g].saturating_sub(1)
                } else {
                    sizes[g] * sizes[h]
                };
                counts[self.shape_map.get(g, h)] += pairs as u64;
            }
        }
        counts
    }
}

pub(crate) fn group_sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    labels.iter().for_each(|&g| sizes[g] += 1);
    sizes
}

pub(crate) fn check_balanced(labels: &[usize], k: usize) -> Result<()> {
    let n = labels.len();
    if k == 0 || k > n {
        return Err(Error::KTooLarge { k, n });
    }
    if let Some(&g) = labels.iter().find(|&&g| g >= k) {
        return Err(Error::InvalidConfig(format!("group label {g} out of range for k = {k}")));
    }
    let (lo, hi) = (n / k, n.div_ceil(k));
    let sizes = group_sizes(labels, k);
    if let Some(g) = sizes.iter().position(|&c| c < lo || c > hi) {
        return Err(Error::InvalidConfig(format!(
            "group {g} has {} nodes, balanced sizes are {lo}..={hi}",
            sizes[g]
        )));
    }
    Ok(())
}

/// Shape probability vectors and ordered off-diagonal pair counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeParams {
    pub q: Vec<Vec<f64>>,
    pub counts: Vec<u64>,
}

fn shape_sums(x: &OneHotTensor, assignment: &Assignment) -> Result<(Vec<Vec<f64>>, Vec<u64>)> {
    let n = x.n();
    if assignment.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} nodes, tensor has {n}",
            assignment.n()
        )));
    }
    let len = x.decorations();
    let mut sums = vec![vec![0.0; len]; assignment.s()];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let row = &mut sums[assignment.shape_of(i, j)];
            row.iter_mut().zip(x.slice(i, j)).for_each(|(s, v)| *s += v);
        }
    }
    let counts = assignment.shape_counts();
    if let Some(c) = counts.iter().position(|&m| m == 0) {
        return Err(Error::EmptyShape(c));
    }
    Ok((sums, counts))
}

/// Shape averages of the one-hot slices over off-diagonal pairs.
pub fn block_means(x: &OneHotTensor, assignment: &Assignment) -> Result<ShapeParams> {
    let (sums, counts) = shape_sums(x, assignment)?;
    let q = sums
        .into_iter()
        .zip(&counts)
        .map(|(row, &m)| row.into_iter().map(|v| v / m as f64).collect())
        .collect();
    Ok(ShapeParams { q, counts })
}

/// Residual sum of squares over off-diagonal pairs, through the profile
/// identity `RSS = n(n-1) - sum_c n_c |mean_c|^2`.
pub fn objective(x: &OneHotTensor, assignment: &Assignment) -> Result<f64> {
    let (sums, counts) = shape_sums(x, assignment)?;
    let n = x.n() as f64;
    let explained: f64 = sums
        .iter()
        .zip(&counts)
        .map(|(row, &m)| row.iter().map(|v| v * v).sum::<f64>() / m as f64)
        .sum();
    Ok(n * (n - 1.0) - explained)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoration::{encode_one_hot, DecoratedGraph, DecorationSpace};
    use crate::rng::{seeded, shuffle};
    use proptest::prelude::*;
    use rand::Rng;

    pub(crate) fn random_graph(n: usize, len: usize, seed: u64) -> DecoratedGraph {
        let mut rng = seeded(seed);
        DecoratedGraph::from_upper(DecorationSpace::indexed(len).unwrap(), n, |_, _| {
            rng.random_range(0..len)
        })
        .unwrap()
    }

    fn random_balanced(n: usize, k: usize, seed: u64) -> Vec<usize> {
        let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
        shuffle(&mut seeded(seed), &mut labels);
        labels
    }

    fn direct_rss(x: &OneHotTensor, a: &Assignment, params: &ShapeParams) -> f64 {
        let n = x.n();
        let mut rss = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let q = &params.q[a.shape_of(i, j)];
                    rss += x
                        .slice(i, j)
                        .iter()
                        .zip(q)
                        .map(|(v, p)| (v - p).powi(2))
                        .sum::<f64>();
                }
            }
        }
        rss
    }

    #[test]
    fn shape_map_validation() {
        assert!(ShapeMap::from_rows(&[vec![0, 1], vec![2, 0]]).is_err());
        assert!(matches!(
            ShapeMap::from_rows(&[vec![0, 2], vec![2, 0]]),
            Err(Error::EmptyShape(1))
        ));
        let full = ShapeMap::full_blocks(3);
        assert_eq!(full.s(), 6);
        assert_eq!(full.rows(), vec![vec![0, 1, 2], vec![1, 3, 4], vec![2, 4, 5]]);
        let json = serde_json::to_string(&full).unwrap();
        assert_eq!(serde_json::from_str::<ShapeMap>(&json).unwrap(), full);
    }

    #[test]
    fn assignment_requires_balance() {
        assert!(Assignment::full_blocks(vec![0, 0, 0, 1], 2).is_err());
        assert!(Assignment::full_blocks(vec![0, 0, 1, 1, 1], 2).is_ok());
        assert!(Assignment::full_blocks(vec![0, 2, 1, 1], 2).is_err());
        assert!(matches!(
            Assignment::full_blocks(vec![0, 1], 3),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn constant_within_shapes_has_zero_rss() {
        let labels = vec![0, 0, 0, 1, 1, 1];
        let g = DecoratedGraph::from_upper(DecorationSpace::indexed(3).unwrap(), 6, |i, j| {
            match (labels[i], labels[j]) {
                (0, 0) => 0,
                (1, 1) => 2,
                _ => 1,
            }
        })
        .unwrap();
        let x = encode_one_hot(&g);
        let a = Assignment::full_blocks(labels.clone(), 2).unwrap();
        let params = block_means(&x, &a).unwrap();
        assert_eq!(params.q, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        assert_eq!(params.counts, vec![6, 18, 6]);
        assert_eq!(objective(&x, &a).unwrap(), 0.0);
    }

    #[test]
    fn four_node_brute_force() {
        // Hand enumeration of the 12 ordered off-diagonal pairs.
        // Upper triangle: (0,1)=1 (0,2)=0 (0,3)=2 (1,2)=2 (1,3)=2 (2,3)=1
        let upper = [[9, 1, 0, 2], [9, 9, 2, 2], [9, 9, 9, 1], [9, 9, 9, 9]];
        let g = DecoratedGraph::from_upper(DecorationSpace::indexed(3).unwrap(), 4, |i, j| {
            upper[i][j]
        })
        .unwrap();
        let x = encode_one_hot(&g);
        let a = Assignment::full_blocks(vec![0, 0, 1, 1], 2).unwrap();
        let p = block_means(&x, &a).unwrap();
        // shape 0: pairs (0,1),(1,0) -> label 1 twice
        // shape 1: (0,2)=0 (0,3)=2 (1,2)=2 (1,3)=2, both orders -> [2, 0, 6] / 8
        // shape 2: (2,3),(3,2) -> label 1 twice
        assert_eq!(p.counts, vec![2, 8, 2]);
        assert_eq!(p.q[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(p.q[1], vec![0.25, 0.0, 0.75]);
        assert_eq!(p.q[2], vec![0.0, 1.0, 0.0]);
        // RSS = 8 * (0.75^2 + 0.25^2 wrongs): 2 pairs at label 0 -> 0.75^2+0.75^2,
        // 6 pairs at label 2 -> 0.25^2+0.25^2
        let expected = 2.0 * (0.5625 + 0.5625) + 6.0 * (0.0625 + 0.0625);
        assert!((objective(&x, &a).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn relabelling_nodes_leaves_q_invariant() {
        let g = random_graph(10, 3, 4);
        let labels = random_balanced(10, 3, 5);
        let x = encode_one_hot(&g);
        let p = block_means(&x, &Assignment::full_blocks(labels.clone(), 3).unwrap()).unwrap();
        let perm: Vec<usize> = (0..10).rev().collect();
        let gp = DecoratedGraph::from_upper(g.space().clone(), 10, |i, j| g.get(perm[i], perm[j]))
            .unwrap();
        let lp: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
        let pp = block_means(&encode_one_hot(&gp), &Assignment::full_blocks(lp, 3).unwrap())
            .unwrap();
        assert_eq!(p, pp);
    }

    #[test]
    fn profile_identity_small() {
        let g = random_graph(8, 3, 21);
        let x = encode_one_hot(&g);
        let a = Assignment::new(
            random_balanced(8, 2, 22),
            ShapeMap::from_rows(&[vec![0, 1], vec![1, 2]]).unwrap(),
        )
        .unwrap();
        let params = block_means(&x, &a).unwrap();
        assert!((objective(&x, &a).unwrap() - direct_rss(&x, &a, &params)).abs() < 1e-9);
    }

    #[test]
    fn single_shape_closed_form() {
        let g = random_graph(9, 4, 3);
        let x = encode_one_hot(&g);
        let a = Assignment::full_blocks(vec![0; 9], 1).unwrap();
        let p = block_means(&x, &a).unwrap();
        let norm2: f64 = p.q[0].iter().map(|v| v * v).sum();
        let closed = 72.0 * (1.0 - norm2);
        assert!((objective(&x, &a).unwrap() - closed).abs() < 1e-9);
    }

    #[test]
    fn empty_shape_is_reported() {
        let x = encode_one_hot(&random_graph(2, 2, 0));
        let a = Assignment::full_blocks(vec![0, 1], 2).unwrap();
        assert!(matches!(block_means(&x, &a), Err(Error::EmptyShape(0))));
    }

    proptest! {
        #[test]
        fn profile_identity_matches_direct_sum(
            n in 4usize..=30, len in 2usize..=5, k in 1usize..=4, seed in any::<u64>(), merge in any::<bool>()
        ) {
            prop_assume!(n / k >= 2);
            let g = random_graph(n, len, seed);
            let x = encode_one_hot(&g);
            let labels = random_balanced(n, k, seed ^ 1);
            let map = if merge && k >= 2 {
                // collapse all off-diagonal blocks into one shape
                let mut rows = vec![vec![k; k]; k];
                (0..k).for_each(|g| rows[g][g] = g);
                ShapeMap::from_rows(&rows).unwrap()
            } else {
                ShapeMap::full_blocks(k)
            };
            let a = Assignment::new(labels, map).unwrap();
            let params = block_means(&x, &a).unwrap();
            for row in &params.q {
                prop_assert!(row.iter().all(|&v| v >= 0.0));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            prop_assert_eq!(params.counts.iter().sum::<u64>(), (n * (n - 1)) as u64);
            let direct = direct_rss(&x, &a, &params);
            prop_assert!((objective(&x, &a).unwrap() - direct).abs() < 1e-9);
        }
    }
}
