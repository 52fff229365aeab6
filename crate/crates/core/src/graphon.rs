//! Analytic decorated graphons and seeded sampling.
//!
//! A decorated graphon maps `(x, y)` in the unit square to a probability
//! vector over the decoration space. Graphs are drawn by sampling latent
//! positions `xi_i ~ U(0, 1)` and then, for each pair `i < j`, a label from
//! `W(xi_i, xi_j)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::decoration::{DecoratedGraph, DecorationSpace};
use crate::error::{Error, Result};
use crate::rng;

/// How raw component values are turned into a probability vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    None,
    Sum,
    Softmax,
}

/// Piecewise-constant truth on a `k x k` grid of blocks of side `1/k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsmParams {
    pub k: usize,
    /// Symmetric `k x k` map from block to shape.
    pub shape_map: Vec<Vec<usize>>,
    /// One probability vector per shape.
    pub q: Vec<Vec<f64>>,
}

impl SsmParams {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(format!("ssm_params: {m}")));
        if self.k == 0 || self.shape_map.len() != self.k {
            return bad("shape_map must have k rows");
        }
        let s = self.q.len();
        let len = self.q.first().map_or(0, Vec::len);
        if s == 0 || len < 2 || self.q.iter().any(|row| row.len() != len) {
            return bad("q must be a non-empty s x L matrix with L >= 2");
        }
        for row in &self.q {
            if row.iter().any(|&p| !(p >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return bad("each row of q must lie on the simplex");
            }
        }
        for (g, row) in self.shape_map.iter().enumerate() {
            if row.len() != self.k {
                return bad("shape_map must be k x k");
            }
            for (h, &c) in row.iter().enumerate() {
                if c >= s || self.shape_map[h][g] != c {
                    return bad("shape_map must be symmetric with entries below s");
                }
            }
        }
        Ok(())
    }

    fn group(&self, x: f64) -> usize {
        ((x * self.k as f64).ceil() as usize).clamp(1, self.k) - 1
    }
}

type ComponentFn = dyn Fn(f64, f64, &mut [f64]) + Send + Sync;

#[derive(Clone)]
enum Kind {
    W1,
    W2,
    W3,
    Ssm(SsmParams),
    Custom {
        name: String,
        raw: Arc<ComponentFn>,
    },
}

/// A decorated graphon with its decoration space and smoothness metadata.
#[derive(Clone)]
pub struct GraphonSpec {
    kind: Kind,
    space: DecorationSpace,
    normalization: Normalization,
    alpha: Option<f64>,
}

impl fmt::Debug for GraphonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphonSpec")
            .field("id", &self.id())
            .field("decorations", &self.space.len())
            .field("normalization", &self.normalization)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl GraphonSpec {
    /// Independent two-layer graphon with marginals `|x - y|` and `min(x, y)`.
    pub fn w1() -> Self {
        Self::bivariate(Kind::W1, Normalization::None, 1.0)
    }

    /// Dependent two-layer graphon, Hölder with exponent 0.5, normalized by
    /// the component sum.
    pub fn w2() -> Self {
        Self::bivariate(Kind::W2, Normalization::Sum, 0.5)
    }

    /// Dependent two-layer graphon normalized by softmax.
    pub fn w3() -> Self {
        Self::bivariate(Kind::W3, Normalization::Softmax, 1.0)
    }

    fn bivariate(kind: Kind, normalization: Normalization, alpha: f64) -> Self {
        Self {
            kind,
            space: DecorationSpace::multiplex(2).expect("two layers"),
            normalization,
            alpha: Some(alpha),
        }
    }

    /// Piecewise-constant graphon. Uses the binary multiplex space when `L`
    /// is a power of two and the indexed space otherwise.
    pub fn ssm(params: SsmParams) -> Result<Self> {
        params.validate()?;
        let len = params.q[0].len();
        let space = if len.is_power_of_two() {
            DecorationSpace::multiplex(len.trailing_zeros() as usize)?
        } else {
            DecorationSpace::indexed(len)?
        };
        Ok(Self {
            kind: Kind::Ssm(params),
            space,
            normalization: Normalization::None,
            alpha: None,
        })
    }

    /// Graphon from programmatic raw components. `raw(x, y, out)` writes `L`
    /// values which are then normalized; it must be symmetric in `(x, y)`.
    pub fn custom<F>(
        name: impl Into<String>,
        space: DecorationSpace,
        normalization: Normalization,
        alpha: Option<f64>,
        raw: F,
    ) -> Self
    where
        F: Fn(f64, f64, &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            kind: Kind::Custom {
                name: name.into(),
                raw: Arc::new(raw),
            },
            space,
            normalization,
            alpha,
        }
    }

    /// Constant graphon putting all mass on `label`.
    pub fn point_mass(space: DecorationSpace, label: usize) -> Self {
        Self::custom("point-mass", space, Normalization::None, None, move |_, _, out| {
            out.fill(0.0);
            out[label] = 1.0;
        })
    }

    pub fn id(&self) -> &str {
        match &self.kind {
            Kind::W1 => "W1",
            Kind::W2 => "W2",
            Kind::W3 => "W3",
            Kind::Ssm(_) => "SSM",
            Kind::Custom { name, .. } => name,
        }
    }

    pub fn space(&self) -> &DecorationSpace {
        &self.space
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Hölder exponent attributed to this graphon, if any.
    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn ssm_params(&self) -> Option<&SsmParams> {
        match &self.kind {
            Kind::Ssm(p) => Some(p),
            _ => None,
        }
    }

    /// Evaluates into `out` (length `L`) without domain checks.
    pub fn eval_into(&self, x: f64, y: f64, out: &mut [f64]) {
        let m = x.min(y);
        let d = (x - y).abs();
        match &self.kind {
            Kind::W1 => {
                out[0] = (1.0 - m) * (1.0 - d);
                out[1] = d * (1.0 - m);
                out[2] = m * (1.0 - d);
                out[3] = m * d;
            }
            Kind::W2 => {
                out[0] = d.sqrt();
                out[1] = (-0.5 * d).exp();
                out[2] = m;
                out[3] = (-m.powf(0.75)).exp();
            }
            Kind::W3 => {
                out[0] = 3.0 * x * y;
                out[1] = 3.0 * (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
                out[2] = (-3.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp();
                out[3] = 2.0 - 3.0 * (x + y);
            }
            Kind::Ssm(p) => {
                let c = p.shape_map[p.group(x)][p.group(y)];
                out.copy_from_slice(&p.q[c]);
            }
            Kind::Custom { raw, .. } => raw(x, y, out),
        }
        match self.normalization {
            Normalization::None => {}
            Normalization::Sum => {
                let total: f64 = out.iter().sum();
                assert!(total >= 1e-12, "component sum {total} below 1e-12 at ({x}, {y})");
                out.iter_mut().for_each(|v| *v /= total);
            }
            Normalization::Softmax => {
                let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                out.iter_mut().for_each(|v| *v = (*v - max).exp());
                let total: f64 = out.iter().sum();
                out.iter_mut().for_each(|v| *v /= total);
            }
        }
    }

    pub fn to_document(&self) -> Result<GraphonDocument> {
        match &self.kind {
            Kind::Custom { name, .. } => Err(Error::InvalidConfig(format!(
                "custom graphon {name:?} cannot be serialized"
            ))),
            kind => Ok(GraphonDocument {
                id: self.id().to_string(),
                n: None,
                seed: None,
                ssm_params: match kind {
                    Kind::Ssm(p) => Some(p.clone()),
                    _ => None,
                },
            }),
        }
    }
}

/// JSON form of a graphon: `{"id": "W3", "n": 300, "seed": 7}` with an
/// optional `ssm_params` block when `id` is `"SSM"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphonDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssm_params: Option<SsmParams>,
}

impl GraphonDocument {
    pub fn named(id: &str) -> Self {
        Self {
            id: id.to_string(),
            n: None,
            seed: None,
            ssm_params: None,
        }
    }

    pub fn to_spec(&self) -> Result<GraphonSpec> {
        match self.id.as_str() {
            "W1" => Ok(GraphonSpec::w1()),
            "W2" => Ok(GraphonSpec::w2()),
            "W3" => Ok(GraphonSpec::w3()),
            "SSM" => GraphonSpec::ssm(self.ssm_params.clone().ok_or_else(|| {
                Error::InvalidConfig("graphon SSM requires ssm_params".into())
            })?),
            other => Err(Error::InvalidConfig(format!("unknown graphon id {other:?}"))),
        }
    }
}

fn check_unit(x: f64, y: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { x, y })
    }
}

pub fn eval_graphon(spec: &GraphonSpec, x: f64, y: f64) -> Result<Vec<f64>> {
    check_unit(x, y)?;
    let mut out = vec![0.0; spec.space.len()];
    spec.eval_into(x, y, &mut out);
    Ok(out)
}

/// `n x n x L` array of probability vectors, laid out as `(i * n + j) * L + l`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityArray {
    n: usize,
    len: usize,
    values: Vec<f64>,
}

impl ProbabilityArray {
    pub fn zeros(n: usize, len: usize) -> Self {
        Self {
            n,
            len,
            values: vec![0.0; n * n * len],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn decorations(&self) -> usize {
        self.len
    }

    pub fn slice(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.n + j) * self.len;
        &self.values[start..start + self.len]
    }

    pub fn slice_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let start = (i * self.n + j) * self.len;
        &mut self.values[start..start + self.len]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `theta_ij = W(xi_i, xi_j)` off the diagonal, the zero vertex on it.
pub fn theta_matrix(spec: &GraphonSpec, xi: &[f64]) -> Result<ProbabilityArray> {
    if let Some(&bad) = xi.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::OutOfDomain { x: bad, y: bad });
    }
    let n = xi.len();
    let len = spec.space.len();
    let mut theta = ProbabilityArray::zeros(n, len);
    let mut buf = vec![0.0; len];
    for i in 0..n {
        theta.slice_mut(i, i)[spec.space.zero_index()] = 1.0;
        for j in i + 1..n {
            spec.eval_into(xi[i], xi[j], &mut buf);
            theta.slice_mut(i, j).copy_from_slice(&buf);
            theta.slice_mut(j, i).copy_from_slice(&buf);
        }
    }
    Ok(theta)
}

#[derive(Clone, Debug)]
pub struct SampleResult {
    pub graph: DecoratedGraph,
    pub xi: Vec<f64>,
    pub theta_true: ProbabilityArray,
    pub seed: u64,
}

/// Inverse-CDF draw over the ordered probability vector. The last label with
/// positive mass absorbs any rounding slack.
fn draw_label(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (l, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = l;
            cum += p;
            if u < cum {
                return l;
            }
        }
    }
    last_positive
}

/// Draws latent positions, then one label per pair `i < j` in row-major
/// order, all from a single stream seeded with `seed`.
pub fn sample_graph(spec: &GraphonSpec, n: usize, seed: u64) -> Result<SampleResult> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("need n >= 2, got {n}")));
    }
    let mut rng = rng::seeded(seed);
    let xi: Vec<f64> = (0..n).map(|_| rng::uniform_open(&mut rng)).collect();
    draw_edges(spec, xi, seed, &mut rng)
}

/// Samples labels conditionally on the given latent positions in `[0, 1]`.
pub fn sample_graph_at(spec: &GraphonSpec, xi: Vec<f64>, seed: u64) -> Result<SampleResult> {
    if xi.len() < 2 {
        return Err(Error::InvalidConfig(format!("need n >= 2, got {}", xi.len())));
    }
    draw_edges(spec, xi, seed, &mut rng::seeded(seed))
}

fn draw_edges(spec: &GraphonSpec, xi: Vec<f64>, seed: u64, rng: &mut rng::SeededRng) -> Result<SampleResult> {
    let theta_true = theta_matrix(spec, &xi)?;
    let graph = DecoratedGraph::from_upper(spec.space.clone(), xi.len(), |i, j| {
        draw_label(theta_true.slice(i, j), rng::uniform(rng))
    })?;
    Ok(SampleResult {
        graph,
        xi,
        theta_true,
        seed,
    })
}

/// JSON form of a sampled graph: the graphon document (with `n` and `seed`
/// filled in), the latent positions and the full label matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDocument {
    pub graphon: GraphonDocument,
    pub decorations: Vec<String>,
    pub zero_index: usize,
    #[serde(serialize_with = "crate::format::ser_vec_f64")]
    pub xi: Vec<f64>,
    /// Row-major `n x n` decoration indices.
    pub labels: Vec<Vec<u16>>,
}

impl SampleResult {
    pub fn to_document(&self, spec: &GraphonSpec) -> Result<SampleDocument> {
        let n = self.graph.n();
        let mut graphon = spec.to_document()?;
        graphon.n = Some(n);
        graphon.seed = Some(self.seed);
        Ok(SampleDocument {
            graphon,
            decorations: spec.space.labels().to_vec(),
            zero_index: spec.space.zero_index(),
            xi: self.xi.clone(),
            labels: self.graph.entries().chunks(n).map(<[u16]>::to_vec).collect(),
        })
    }
}

impl SampleDocument {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("serializable");
        out.push('\n');
        out
    }

    pub fn to_graph(&self) -> Result<DecoratedGraph> {
        let space = DecorationSpace::new(self.decorations.clone(), self.zero_index)?;
        let n = self.labels.len();
        if self.labels.iter().any(|row| row.len() != n) || self.xi.len() != n {
            return Err(Error::DimensionMismatch("sample document is not square".into()));
        }
        DecoratedGraph::new(space, n, self.labels.concat())
    }
}
