//! Agglomerative merging of blocks into shapes.
//!
//! Starting from one shape per unordered block, the pair of shapes with the
//! smallest Ward increase `n_a n_b / (n_a + n_b) |Q_a - Q_b|^2` is merged
//! until a single shape remains. That increase is exactly the change in the
//! least-squares objective, so the path is monotone in RSS.

use super::stats::{explained, BlockStats};
use super::{check_balanced, ShapeMap, LIKELIHOOD_FLOOR};
use crate::decoration::OneHotTensor;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PathEntry {
    pub s: usize,
    pub rss: f64,
    /// Categorical log-likelihood over unordered pairs.
    pub log_likelihood: f64,
    /// Shapes merged to reach this entry, as indices into the initial
    /// full-block numbering (the merged shape keeps the smaller index).
    pub merged: Option<(usize, usize)>,
    pub ward_increase: f64,
}

/// Every model from the full block model (`s = k(k+1)/2`) down to `s = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MergePath {
    k: usize,
    n: usize,
    decorations: usize,
    entries: Vec<PathEntry>,
}

impl MergePath {
    pub fn entries(&self) -> &[PathEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn decorations(&self) -> usize {
        self.decorations
    }

    /// Index of the entry with `s` shapes.
    pub fn index_of(&self, s: usize) -> Option<usize> {
        self.entries.iter().position(|e| e.s == s)
    }

    /// Shape map of entry `index`, shapes renumbered by first appearance in
    /// row-major block order.
    pub fn shape_map(&self, index: usize) -> ShapeMap {
        let full = ShapeMap::full_blocks(self.k);
        let mut parent: Vec<usize> = (0..full.s()).collect();
        for entry in &self.entries[..=index] {
            if let Some((a, b)) = entry.merged {
                parent[b] = a;
            }
        }
        let root = |mut c: usize| {
            while parent[c] != c {
                c = parent[c];
            }
            c
        };
        let mut renumber = vec![usize::MAX; full.s()];
        let mut next = 0;
        let map = full
            .flat()
            .iter()
            .map(|&c| {
                let r = root(c);
                if renumber[r] == usize::MAX {
                    renumber[r] = next;
                    next += 1;
                }
                renumber[r]
            })
            .collect();
        ShapeMap::from_flat(self.k, map).expect("merged map is valid")
    }
}

pub(crate) fn cluster_log_likelihood(sums: &[i64], count: i64) -> f64 {
    sums.iter()
        .filter(|&&v| v > 0)
        .map(|&v| {
            let p = (v as f64 / count as f64).clamp(LIKELIHOOD_FLOOR, 1.0);
            0.5 * v as f64 * p.ln()
        })
        .sum()
}

struct Clusters {
    len: usize,
    sums: Vec<i64>,
    counts: Vec<i64>,
    means: Vec<f64>,
    active: Vec<bool>,
}

impl Clusters {
    #[inline]
    fn ward(&self, a: usize, b: usize) -> f64 {
        let len = self.len;
        let (na, nb) = (self.counts[a] as f64, self.counts[b] as f64);
        let qa = &self.means[a * len..(a + 1) * len];
        let qb = &self.means[b * len..(b + 1) * len];
        let dist: f64 = qa.iter().zip(qb).map(|(x, y)| (x - y) * (x - y)).sum();
        na * nb / (na + nb) * dist
    }

    /// Nearest active neighbour of `c`, ties to the lower index.
    fn nearest(&self, c: usize) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        for d in (0..self.active.len()).filter(|&d| d != c && self.active[d]) {
            let w = self.ward(c, d);
            if w < best.0 {
                best = (w, d);
            }
        }
        best
    }

    fn absorb(&mut self, a: usize, b: usize) {
        let len = self.len;
        for l in 0..len {
            self.sums[a * len + l] += self.sums[b * len + l];
        }
        self.counts[a] += self.counts[b];
        let m = self.counts[a] as f64;
        for l in 0..len {
            self.means[a * len + l] = self.sums[a * len + l] as f64 / m;
        }
        self.active[b] = false;
    }
}

pub(crate) fn merge_path_from(data: &[u16], n: usize, len: usize, labels: &[usize], k: usize) -> Result<MergePath> {
    let full = ShapeMap::full_blocks(k);
    let stats = BlockStats::compute(data, n, len, labels, k);
    let (sums, counts) = stats.shape_totals(&full);
    if let Some(c) = counts.iter().position(|&m| m == 0) {
        return Err(Error::EmptyShape(c));
    }
    let s0 = full.s();
    let means = sums
        .chunks(len)
        .zip(&counts)
        .flat_map(|(row, &m)| row.iter().map(move |&v| v as f64 / m as f64))
        .collect();
    let mut cl = Clusters {
        len,
        sums,
        counts,
        means,
        active: vec![true; s0],
    };
    let total_pairs = (n * (n - 1)) as f64;
    let mut fit_part = explained(&cl.sums, &cl.counts, len);
    let mut ll: f64 = (0..s0)
        .map(|c| cluster_log_likelihood(&cl.sums[c * len..(c + 1) * len], cl.counts[c]))
        .sum();
    let mut entries = Vec::with_capacity(s0);
    entries.push(PathEntry {
        s: s0,
        rss: total_pairs - fit_part,
        log_likelihood: ll,
        merged: None,
        ward_increase: 0.0,
    });

    let mut nn: Vec<(f64, usize)> = (0..s0).map(|c| cl.nearest(c)).collect();
    for s in (1..s0).rev() {
        let mut pick: Option<(f64, usize, usize)> = None;
        for c in (0..s0).filter(|&c| cl.active[c]) {
            let (w, d) = nn[c];
            let cand = (w, c.min(d), c.max(d));
            if pick.is_none_or(|p| (cand.0, cand.1, cand.2) < p) {
                pick = Some(cand);
            }
        }
        let (_, a, b) = pick.expect("at least two active shapes");
        let part = |cl: &Clusters, c: usize| {
            let row = &cl.sums[c * len..(c + 1) * len];
            (
                row.iter().map(|&v| (v * v) as f64).sum::<f64>() / cl.counts[c] as f64,
                cluster_log_likelihood(row, cl.counts[c]),
            )
        };
        let (fa, la) = part(&cl, a);
        let (fb, lb) = part(&cl, b);
        let ward = cl.ward(a, b);
        cl.absorb(a, b);
        let (fm, lm) = part(&cl, a);
        fit_part += fm - fa - fb;
        ll += lm - la - lb;
        entries.push(PathEntry {
            s,
            rss: total_pairs - fit_part,
            log_likelihood: ll,
            merged: Some((a, b)),
            ward_increase: ward,
        });

        let mut stale = vec![a];
        for c in (0..s0).filter(|&c| cl.active[c] && c != a) {
            let (w, d) = nn[c];
            if d == a || d == b {
                stale.push(c);
            } else {
                let wa = cl.ward(c, a);
                if (wa, a) < (w, d) {
                    nn[c] = (wa, a);
                }
            }
        }
        if s > 1 {
            for c in stale {
                nn[c] = cl.nearest(c);
            }
        }
    }
    Ok(MergePath {
        k,
        n,
        decorations: len,
        entries,
    })
}

pub fn merge_path(x: &OneHotTensor, node_labels: &[usize], k: usize) -> Result<MergePath> {
    if node_labels.len() != x.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} nodes",
            node_labels.len(),
            x.n()
        )));
    }
    check_balanced(node_labels, k)?;
    merge_path_from(&x.labels()?, x.n(), x.decorations(), node_labels, k)
}
