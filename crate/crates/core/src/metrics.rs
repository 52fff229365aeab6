//! Estimation losses and two-layer summaries of fitted models.

use std::collections::HashMap;

use crate::decoration::{bernoulli2_reparam, BivariateBernoulliParams};
use crate::error::{Error, Result};
use crate::estimator::Fit;
use crate::format::sig17;
use crate::graphon::{GraphonSpec, ProbabilityArray};

/// `(1/n^2) sum_{i != j} |theta_hat_ij - theta_ij|^2`. The divisor stays
/// `n^2` although the diagonal is skipped.
pub fn mse(theta_hat: &ProbabilityArray, theta_true: &ProbabilityArray) -> Result<f64> {
    if theta_hat.n() != theta_true.n() || theta_hat.decorations() != theta_true.decorations() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            theta_hat.n(),
            theta_hat.n(),
            theta_hat.decorations(),
            theta_true.n(),
            theta_true.n(),
            theta_true.decorations()
        )));
    }
    let n = theta_hat.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            total += theta_hat
                .slice(i, j)
                .iter()
                .zip(theta_true.slice(i, j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    Ok(total / (n * n) as f64)
}

/// Integrated squared error between the true graphon and the fitted shape
/// function, with fitted nodes placed along `[0, 1]` in ascending order of
/// their true latent positions.
///
/// Cell `(p, q)` of the `1/n` grid takes the fitted vector of the shape
/// covering the `p`-th and `q`-th nodes in that order (diagonal cells
/// included). The integral is a midpoint rule on a `grid_size x grid_size`
/// lattice. Because the latent order is only one admissible alignment, the
/// value bounds the alignment-minimized error from above.
pub fn mise_oracle(fit: &Fit, spec: &GraphonSpec, xi: &[f64], grid_size: usize) -> Result<f64> {
    let n = fit.n();
    if xi.len() != n {
        return Err(Error::XiMismatch {
            expected: n,
            got: xi.len(),
        });
    }
    if spec.space().len() != fit.space.len() {
        return Err(Error::ShapeMismatch(format!(
            "graphon has {} decorations, fit has {}",
            spec.space().len(),
            fit.space.len()
        )));
    }
    if grid_size < 1 {
        return Err(Error::InvalidConfig("grid_size must be positive".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xi[a].total_cmp(&xi[b]).then(a.cmp(&b)));
    let g = grid_size as f64;
    let mids: Vec<f64> = (0..grid_size).map(|a| (a as f64 + 0.5) / g).collect();
    let cells: Vec<usize> = mids
        .iter()
        .map(|&t| order[((t * n as f64).ceil() as usize).clamp(1, n) - 1])
        .collect();
    let mut truth = vec![0.0; spec.space().len()];
    let mut total = 0.0;
    for (a, &x) in mids.iter().enumerate() {
        for (b, &y) in mids.iter().enumerate() {
            spec.eval_into(x, y, &mut truth);
            let est = fit.shape_value(cells[a], cells[b]);
            total += truth
                .iter()
                .zip(est)
                .map(|(w, e)| (w - e) * (w - e))
                .sum::<f64>();
        }
    }
    Ok(total / (g * g))
}

/// Per-shape marginals and correlation of a two-layer fit, plus node-by-node
/// expansions in the canonical node order (row-major, `n x n`).
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSurface {
    pub shapes: Vec<BivariateBernoulliParams>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub rho: Vec<Option<f64>>,
}

pub fn correlation_surface(fit: &Fit) -> Result<CorrelationSurface> {
    if fit.space.multiplex_layers() != Some(2) {
        return Err(Error::NotBivariateCoding);
    }
    let shapes = fit
        .params
        .q
        .iter()
        .map(|row| bernoulli2_reparam(row))
        .collect::<Result<Vec<_>>>()?;
    let n = fit.n();
    let mut p1 = Vec::with_capacity(n * n);
    let mut p2 = Vec::with_capacity(n * n);
    let mut rho = Vec::with_capacity(n * n);
    for &i in &fit.node_order {
        for &j in &fit.node_order {
            let c = &shapes[fit.assignment.shape_of(i, j)];
            p1.push(c.p1);
            p2.push(c.p2);
            rho.push(c.rho);
        }
    }
    Ok(CorrelationSurface { shapes, p1, p2, rho })
}

/// Pair-count-weighted mean of `|rho|` over shapes with defined correlation.
pub fn weighted_mean_abs_rho(fit: &Fit, surface: &CorrelationSurface) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (c, shape) in surface.shapes.iter().enumerate() {
        if let Some(r) = shape.rho {
            let w = fit.params.counts[c] as f64;
            num += w * r.abs();
            den += w;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `n^(-2 alpha / (alpha + 1)) + log(n) / n`.
pub fn rate_reference(n: usize, alpha: f64) -> f64 {
    let n = n as f64;
    n.powf(-2.0 * alpha / (alpha + 1.0)) + n.ln() / n
}

/// One row of a rate study.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    pub n: usize,
    pub decorations: usize,
    pub k: usize,
    pub s: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mse: f64,
    pub mise: Option<f64>,
    pub rate_reference: f64,
}

impl EvaluationReport {
    pub const CSV_HEADER: &'static str = "n,L,k,s,alpha,seed,mse,mise,rate_reference";

    /// Values in header order; a missing MISE is an empty field.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n,
            self.decorations,
            self.k,
            self.s,
            sig17(self.alpha),
            self.seed,
            sig17(self.mse),
            self.mise.map(sig17).unwrap_or_default(),
            sig17(self.rate_reference)
        )
    }
}

/// Adjusted Rand index between two labellings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labellings must cover the same items");
    let choose2 = |m: u64| (m * m.saturating_sub(1)) as f64 / 2.0;
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut ra: HashMap<usize, u64> = HashMap::new();
    let mut rb: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ra.entry(x).or_default() += 1;
        *rb.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&m| choose2(m)).sum();
    let sa: f64 = ra.values().map(|&m| choose2(m)).sum();
    let sb: f64 = rb.values().map(|&m| choose2(m)).sum();
    let total = choose2(a.len() as u64);
    let expected = sa * sb / total;
    let max = (sa + sb) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{fit, FitConfig};
    use crate::graphon::sample_graph;

    #[test]
    fn mse_examples() {
        let mut a = ProbabilityArray::zeros(2, 2);
        let mut b = ProbabilityArray::zeros(2, 2);
        for (i, j) in [(0, 1), (1, 0)] {
            a.slice_mut(i, j).copy_from_slice(&[1.0, 0.0]);
            b.slice_mut(i, j).copy_from_slice(&[0.0, 1.0]);
        }
        assert_eq!(mse(&a, &b).unwrap(), 1.0);
        assert_eq!(mse(&b, &a).unwrap(), 1.0);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert!(mse(&a, &ProbabilityArray::zeros(3, 2)).is_err());
    }

    #[test]
    fn mse_equals_elementwise_sum() {
        let spec = GraphonSpec::w3();
        let s = sample_graph(&spec, 40, 2).unwrap();
        let f = fit(&s.graph, &FitConfig { k: Some(4), ..FitConfig::default() }).unwrap();
        let hat = f.theta_hat();
        let mut total = 0.0;
        for (idx, (x, y)) in hat.values().iter().zip(s.theta_true.values()).enumerate() {
            let pair = idx / 4;
            if pair / 40 != pair % 40 {
                total += (x - y).powi(2);
            }
        }
        let m = mse(&hat, &s.theta_true).unwrap();
        assert!((m - total / 1600.0).abs() < 1e-12);
        assert!((0.0..=2.0).contains(&m));
    }

    #[test]
    fn ari_basics() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[0, 0, 0]), 1.0);
    }

    #[test]
    fn rate_reference_values() {
        let r = rate_reference(100, 1.0);
        assert!((r - (0.01 + 100f64.ln() / 100.0)).abs() < 1e-15);
    }

    #[test]
    fn csv_row_layout() {
        let r = EvaluationReport {
            n: 100,
            decorations: 4,
            k: 10,
            s: 7,
            alpha: 1.0,
            seed: 9,
            mse: 0.5,
            mise: None,
            rate_reference: 0.25,
        };
        assert_eq!(
            r.csv_row(),
            "100,4,10,7,1.0000000000000000e0,9,5.0000000000000000e-1,,2.5000000000000000e-1"
        );
    }

    #[test]
    fn correlation_requires_two_layers() {
        let spec = GraphonSpec::point_mass(crate::decoration::DecorationSpace::indexed(3).unwrap(), 1);
        let s = sample_graph(&spec, 12, 0).unwrap();
        let f = fit(&s.graph, &FitConfig { k: Some(2), ..FitConfig::default() }).unwrap();
        assert!(matches!(correlation_surface(&f), Err(Error::NotBivariateCoding)));
    }

    #[test]
    fn correlation_reconstructs_q() {
        let s = sample_graph(&GraphonSpec::w3(), 60, 1).unwrap();
        let f = fit(&s.graph, &FitConfig { k: Some(5), ..FitConfig::default() }).unwrap();
        let surface = correlation_surface(&f).unwrap();
        assert_eq!(surface.p1.len(), 3600);
        for (shape, row) in surface.shapes.iter().zip(&f.params.q) {
            if let Some(back) = shape.to_theta() {
                for (a, b) in back.iter().zip(row) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn mise_grid_refinement_is_stable() {
        let spec = GraphonSpec::w1();
        let s = sample_graph(&spec, 150, 4).unwrap();
        let f = fit(&s.graph, &FitConfig { alpha_hint: Some(1.0), ..FitConfig::default() }).unwrap();
        let coarse = mise_oracle(&f, &spec, &s.xi, 200).unwrap();
        let fine = mise_oracle(&f, &spec, &s.xi, 400).unwrap();
        assert!(coarse >= 0.0 && fine >= 0.0);
        assert!((coarse - fine).abs() <= 0.02);
        assert!(matches!(
            mise_oracle(&f, &spec, &s.xi[1..], 200),
            Err(Error::XiMismatch { .. })
        ));
    }
}
