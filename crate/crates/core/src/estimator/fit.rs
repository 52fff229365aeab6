//! End-to-end fitting pipeline and the fitted step-function estimator.

use serde::{Deserialize, Serialize};

use super::greedy::run_greedy;
use super::merge::{cluster_log_likelihood, merge_path_from};
use super::select::{bic, max_groups, select_k_with, select_s_bic};
use super::spectral::{balanced_cut, spectral_order_from};
use super::stats::BlockStats;
use super::{Assignment, ShapeMap, ShapeParams};
use crate::decoration::{encode_one_hot, DecoratedGraph, DecorationSpace};
use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_matrix_f64, ser_opt_f64, ser_vec_f64};
use crate::graphon::ProbabilityArray;
use crate::parallel::{self, Execution};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub k: Option<usize>,
    pub s: Option<usize>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub alpha_hint: Option<f64>,
    pub max_sweeps: usize,
    pub seed: u64,
    /// Restart 0 starts from the spectral labelling, later restarts from
    /// seeded random balanced labellings. Five is a reasonable choice for
    /// real data.
    pub starts: usize,
    /// Minimum RSS decrease for an exchange to be accepted.
    #[serde(serialize_with = "ser_f64")]
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k: None,
            s: None,
            alpha_hint: None,
            max_sweeps: 100,
            seed: 0,
            starts: 1,
            tolerance: 0.0,
        }
    }
}

/// A fitted stochastic shape model.
#[derive(Clone, Debug, PartialEq)]
pub struct Fit {
    pub space: DecorationSpace,
    pub assignment: Assignment,
    pub params: ShapeParams,
    pub rss: f64,
    pub log_likelihood: f64,
    pub bic: f64,
    /// RSS trace of both swap phases of the winning restart.
    pub trace: Vec<f64>,
    /// Canonical node order: by group, then decreasing number of non-zero
    /// decorations, then node index.
    pub node_order: Vec<usize>,
    pub restart: usize,
    pub config: FitConfig,
}

impl Fit {
    pub fn n(&self) -> usize {
        self.assignment.n()
    }

    /// Fitted probability vector of the shape covering pair `(i, j)`,
    /// diagonal included.
    pub fn shape_value(&self, i: usize, j: usize) -> &[f64] {
        &self.params.q[self.assignment.shape_of(i, j)]
    }

    /// `theta_hat`, with the zero vertex on the diagonal.
    pub fn theta_hat(&self) -> ProbabilityArray {
        let n = self.n();
        let mut theta = ProbabilityArray::zeros(n, self.space.len());
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    theta.slice_mut(i, i)[self.space.zero_index()] = 1.0;
                } else {
                    theta.slice_mut(i, j).copy_from_slice(self.shape_value(i, j));
                }
            }
        }
        theta
    }

    pub fn to_document(&self) -> FitDocument {
        FitDocument {
            n: self.n(),
            k: self.assignment.k(),
            s: self.assignment.s(),
            decorations: self.space.labels().to_vec(),
            zero_index: self.space.zero_index(),
            node_labels: self.assignment.node_labels().to_vec(),
            shape_map: self.assignment.shape_map().rows(),
            q: self.params.q.clone(),
            counts: self.params.counts.clone(),
            rss: self.rss,
            log_likelihood: self.log_likelihood,
            bic: self.bic,
            seed: self.config.seed,
            restart: self.restart,
            node_order: self.node_order.clone(),
            trace: self.trace.clone(),
            config: self.config.clone(),
        }
    }

    /// Pretty-printed JSON with 17 significant digits and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_document()).expect("serializable");
        s.push('\n');
        s
    }
}

/// JSON form of a [`Fit`]. Fields, in order:
///
/// - `n`, `k`, `s`: node, group and shape counts
/// - `decorations`: labels of the decoration space; `zero_index`
/// - `node_labels`: group of every node
/// - `shape_map`: `k x k` block-to-shape matrix
/// - `q`: `s x L` shape probability vectors, row-major
/// - `counts`: ordered off-diagonal pair count per shape
/// - `rss`, `log_likelihood`, `bic`
/// - `seed`, `restart`: master seed and winning restart index
/// - `node_order`: canonical node order used by heatmaps
/// - `trace`: RSS history of the swap search
/// - `config`: the [`FitConfig`] used
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub decorations: Vec<String>,
    pub zero_index: usize,
    pub node_labels: Vec<usize>,
    pub shape_map: Vec<Vec<usize>>,
    #[serde(serialize_with = "ser_matrix_f64")]
    pub q: Vec<Vec<f64>>,
    pub counts: Vec<u64>,
    #[serde(serialize_with = "ser_f64")]
    pub rss: f64,
    #[serde(serialize_with = "ser_f64")]
    pub log_likelihood: f64,
    #[serde(serialize_with = "ser_f64")]
    pub bic: f64,
    pub seed: u64,
    pub restart: usize,
    pub node_order: Vec<usize>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub trace: Vec<f64>,
    pub config: FitConfig,
}

struct Candidate {
    labels: Vec<usize>,
    map: ShapeMap,
    rss: f64,
    trace: Vec<f64>,
}

fn random_balanced(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::seeded(seed), &mut order);
    balanced_cut(&order, k).expect("k <= n")
}

pub fn fit(graph: &DecoratedGraph, config: &FitConfig) -> Result<Fit> {
    fit_with(graph, config, Execution::default())
}

/// Spectral start, swaps at full blocks, Ward merge path, `s` by BIC (or
/// truncation at `config.s`), a second swap pass under the chosen shape map,
/// and shape means. Restarts and the `k` grid run under `exec`; the result
/// does not depend on it.
pub fn fit_with(graph: &DecoratedGraph, config: &FitConfig, exec: Execution) -> Result<Fit> {
    let n = graph.n();
    if n < 4 {
        return Err(Error::InvalidConfig(format!("fit needs n >= 4, got {n}")));
    }
    if config.starts == 0 {
        return Err(Error::InvalidConfig("starts must be at least 1".into()));
    }
    let x = encode_one_hot(graph);
    let k = match config.k {
        Some(k) => k,
        None => select_k_with(&x, config, exec)?,
    };
    if k == 0 || k > max_groups(n) {
        return Err(Error::KTooLarge { k, n });
    }
    let s0 = k * (k + 1) / 2;
    if let Some(s) = config.s {
        if s == 0 || s > s0 {
            return Err(Error::InvalidConfig(format!("s = {s} outside 1..={s0} for k = {k}")));
        }
    }
    let data = graph.entries();
    let len = graph.space().len();
    let spectral = (k > 1).then(|| spectral_order_from(data, n));

    let restarts: Vec<usize> = (0..config.starts).collect();
    let candidates = parallel::map(exec, &restarts, |&r| -> Result<Candidate> {
        let start = match (&spectral, r) {
            (Some(order), 0) => balanced_cut(order, k)?,
            (None, _) => vec![0; n],
            _ => random_balanced(n, k, rng::derive_seed(config.seed, &[1, r as u64])),
        };
        let full = ShapeMap::full_blocks(k);
        let sweep = |labels, map: &ShapeMap, phase: u64| {
            let seed = rng::derive_seed(config.seed, &[phase, r as u64]);
            run_greedy(data, n, len, labels, map, config.max_sweeps, config.tolerance, seed, |_, _| {})
        };
        let first = sweep(start, &full, 2);
        let path = merge_path_from(data, n, len, &first.node_labels, k)?;
        let idx = match config.s {
            Some(s) => path.index_of(s).expect("every s in 1..=s0 is on the path"),
            None => select_s_bic(&path),
        };
        let map = path.shape_map(idx);
        let second = sweep(first.node_labels, &map, 3);
        let mut trace = first.trace;
        trace.extend(second.trace);
        Ok(Candidate {
            labels: second.node_labels,
            map,
            rss: second.rss,
            trace,
        })
    });
    let mut best: Option<(usize, Candidate)> = None;
    for (r, cand) in candidates.into_iter().enumerate() {
        let cand = cand?;
        if best.as_ref().is_none_or(|(_, b)| cand.rss < b.rss) {
            best = Some((r, cand));
        }
    }
    let (restart, best) = best.expect("at least one restart");

    let stats = BlockStats::compute(data, n, len, &best.labels, k);
    let (sums, counts) = stats.shape_totals(&best.map);
    let log_likelihood: f64 = sums
        .chunks(len)
        .zip(&counts)
        .map(|(row, &m)| cluster_log_likelihood(row, m))
        .sum();
    let q = sums
        .chunks(len)
        .zip(&counts)
        .map(|(row, &m)| row.iter().map(|&v| v as f64 / m as f64).collect())
        .collect();
    let s = best.map.s();
    let assignment = Assignment::new(best.labels, best.map)?;
    let mut node_order: Vec<usize> = (0..n).collect();
    let degree: Vec<usize> = (0..n).map(|i| graph.degree(i)).collect();
    let labels = assignment.node_labels();
    node_order.sort_by(|&a, &b| {
        labels[a]
            .cmp(&labels[b])
            .then(degree[b].cmp(&degree[a]))
            .then(a.cmp(&b))
    });
    Ok(Fit {
        space: graph.space().clone(),
        assignment,
        params: ShapeParams {
            q,
            counts: counts.into_iter().map(|c| c as u64).collect(),
        },
        rss: best.rss,
        log_likelihood,
        bic: bic(log_likelihood, s, len, n),
        trace: best.trace,
        node_order,
        restart,
        config: FitConfig {
            k: Some(k),
            ..config.clone()
        },
    })
}

/// Step-function estimate at `(x, y)` in `(0, 1]^2`: the fitted vector of the
/// node pair in cells `ceil(n x)`, `ceil(n y)` of the canonical node order,
/// the zero vertex on diagonal cells.
pub fn estimate_function(fit: &Fit, x: f64, y: f64) -> Result<Vec<f64>> {
    if !(x > 0.0 && x <= 1.0 && y > 0.0 && y <= 1.0) {
        return Err(Error::OutOfDomain { x, y });
    }
    let n = fit.n();
    let cell = |t: f64| ((t * n as f64).ceil() as usize).clamp(1, n) - 1;
    let (p, q) = (cell(x), cell(y));
    if p == q {
        let mut v = vec![0.0; fit.space.len()];
        v[fit.space.zero_index()] = 1.0;
        return Ok(v);
    }
    Ok(fit
        .shape_value(fit.node_order[p], fit.node_order[q])
        .to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{block_means, objective};
    use crate::graphon::{sample_graph, GraphonSpec, SsmParams};

    fn planted_ssm(seed: u64, n: usize) -> crate::graphon::SampleResult {
        let spec = GraphonSpec::ssm(SsmParams {
            k: 2,
            shape_map: vec![vec![0, 2], vec![2, 1]],
            q: vec![
                vec![0.7, 0.1, 0.1, 0.1],
                vec![0.1, 0.7, 0.1, 0.1],
                vec![0.1, 0.1, 0.7, 0.1],
            ],
        })
        .unwrap();
        sample_graph(&spec, n, seed).unwrap()
    }

    #[test]
    fn fit_is_deterministic_and_consistent() {
        let sample = planted_ssm(3, 60);
        let cfg = FitConfig {
            k: Some(3),
            starts: 3,
            seed: 11,
            ..FitConfig::default()
        };
        let a = fit(&sample.graph, &cfg).unwrap();
        let b = fit(&sample.graph, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        let seq = fit_with(&sample.graph, &cfg, Execution::Sequential).unwrap();
        assert_eq!(a, seq);
        let x = encode_one_hot(&sample.graph);
        assert!((objective(&x, &a.assignment).unwrap() - a.rss).abs() < 1e-7);
        assert_eq!(block_means(&x, &a.assignment).unwrap(), a.params);
        for row in &a.params.q {
            assert!(row.iter().all(|&v| v >= 0.0));
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_graphon_fit() {
        let spec = GraphonSpec::point_mass(DecorationSpace::indexed(3).unwrap(), 1);
        let sample = sample_graph(&spec, 40, 1).unwrap();
        let f = fit(&sample.graph, &FitConfig { k: Some(4), ..FitConfig::default() }).unwrap();
        assert_eq!(f.assignment.s(), 1);
        assert_eq!(f.params.q, vec![vec![0.0, 1.0, 0.0]]);
        assert_eq!(f.rss, 0.0);
    }

    #[test]
    fn explicit_s_truncates_path() {
        let sample = planted_ssm(5, 40);
        let f = fit(&sample.graph, &FitConfig { k: Some(3), s: Some(2), ..FitConfig::default() })
            .unwrap();
        assert_eq!(f.assignment.s(), 2);
        assert!(fit(&sample.graph, &FitConfig { k: Some(3), s: Some(7), ..FitConfig::default() })
            .is_err());
        assert!(matches!(
            fit(&sample.graph, &FitConfig { k: Some(21), ..FitConfig::default() }),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn step_function_lookup() {
        let sample = planted_ssm(8, 30);
        let f = fit(&sample.graph, &FitConfig { k: Some(2), ..FitConfig::default() }).unwrap();
        let n = 30.0;
        let diag = estimate_function(&f, 0.5 / n, 0.5 / n).unwrap();
        assert_eq!(diag, vec![1.0, 0.0, 0.0, 0.0]);
        let (u, v) = (f.node_order[0], f.node_order[1]);
        let off = estimate_function(&f, 0.5 / n, 1.5 / n).unwrap();
        assert_eq!(off, f.shape_value(u, v));
        // constant on each cell
        assert_eq!(estimate_function(&f, 0.01 / n, 1.99 / n).unwrap(), off);
        assert_eq!(estimate_function(&f, 1.0 / n, 2.0 / n).unwrap(), off);
        assert!(estimate_function(&f, 0.0, 0.5).is_err());
    }

    #[test]
    fn canonical_order_groups_then_degree() {
        let sample = planted_ssm(2, 40);
        let f = fit(&sample.graph, &FitConfig { k: Some(2), ..FitConfig::default() }).unwrap();
        let labels = f.assignment.node_labels();
        for w in f.node_order.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(labels[a] <= labels[b]);
            if labels[a] == labels[b] {
                assert!(sample.graph.degree(a) >= sample.graph.degree(b));
            }
        }
    }

    #[test]
    fn json_document_roundtrip() {
        let sample = planted_ssm(4, 30);
        let f = fit(&sample.graph, &FitConfig { k: Some(2), ..FitConfig::default() }).unwrap();
        let json = f.to_json();
        assert!(json.contains("\"rss\": "));
        let doc: FitDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, f.to_document());
    }

    #[test]
    fn relabelling_nodes_is_equivariant() {
        let sample = planted_ssm(6, 50);
        let cfg = FitConfig { k: Some(2), ..FitConfig::default() };
        let f = fit(&sample.graph, &cfg).unwrap();
        let n = 50;
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
        let g2 = DecoratedGraph::from_upper(sample.graph.space().clone(), n, |i, j| {
            sample.graph.get(perm[i], perm[j])
        })
        .unwrap();
        let f2 = fit(&g2, &cfg).unwrap();
        assert!((f.rss - f2.rss).abs() < 1e-7);
        assert!((f.bic - f2.bic).abs() < 1e-6);
        let mut qa = f.params.q.clone();
        let mut qb = f2.params.q.clone();
        qa.sort_by(|a, b| a.partial_cmp(b).unwrap());
        qb.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in qa.iter().zip(&qb) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let ari = crate::metrics::adjusted_rand_index(
            &(0..n).map(|i| f2.assignment.node_labels()[i]).collect::<Vec<_>>(),
            &perm.iter().map(|&p| f.assignment.node_labels()[p]).collect::<Vec<_>>(),
        );
        assert_eq!(ari, 1.0);
    }
}
