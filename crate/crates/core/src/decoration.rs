//! Finite decoration spaces and decorated graphs.
//!
//! A decorated graph assigns to every unordered node pair one label from a
//! finite, ordered set `K` of size `L`. The label at `zero_index` plays the
//! role of "no edge". Multiplex networks with `T` binary layers map onto the
//! space `{0,1}^T` enumerated in binary-counting order, layer `t` being bit `t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered finite label set with a designated zero element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecorationSpace {
    labels: Vec<String>,
    zero_index: usize,
}

impl DecorationSpace {
    pub fn new(labels: Vec<String>, zero_index: usize) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidSpace(format!(
                "need at least two labels, got {}",
                labels.len()
            )));
        }
        if labels.len() > u16::MAX as usize {
            return Err(Error::InvalidSpace(format!("{} labels", labels.len())));
        }
        if zero_index >= labels.len() {
            return Err(Error::InvalidSpace(format!(
                "zero index {zero_index} out of range for {} labels",
                labels.len()
            )));
        }
        let mut sorted: Vec<&String> = labels.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpace("labels must be distinct".into()));
        }
        Ok(Self { labels, zero_index })
    }

    /// Labels `"0", "1", …, "L-1"` with zero element `0`.
    pub fn indexed(len: usize) -> Result<Self> {
        Self::new((0..len).map(|l| l.to_string()).collect(), 0)
    }

    /// The space `{0,1}^T` in binary-counting order. Label `l` is the tuple
    /// whose entry `t` is bit `t` of `l`, written left to right, so for
    /// `T = 2` the order is `00, 10, 01, 11`.
    pub fn multiplex(layers: usize) -> Result<Self> {
        if layers == 0 || layers > 15 {
            return Err(Error::InvalidSpace(format!("{layers} layers")));
        }
        let labels = (0..1usize << layers)
            .map(|l| (0..layers).map(|t| if l >> t & 1 == 1 { '1' } else { '0' }).collect())
            .collect();
        Self::new(labels, 0)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    /// Number of layers if this is the binary-counting multiplex space.
    pub fn multiplex_layers(&self) -> Option<usize> {
        let len = self.labels.len();
        if !len.is_power_of_two() {
            return None;
        }
        let layers = len.trailing_zeros() as usize;
        (Self::multiplex(layers).ok().as_ref() == Some(self)).then_some(layers)
    }
}

/// Symmetric `n x n` array of decoration indices with the zero label on the
/// diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoratedGraph {
    space: DecorationSpace,
    n: usize,
    entries: Vec<u16>,
}

impl DecoratedGraph {
    pub fn new(space: DecorationSpace, n: usize, entries: Vec<u16>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidGraph(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let zero = space.zero_index() as u16;
        for i in 0..n {
            if entries[i * n + i] != zero {
                return Err(Error::InvalidGraph(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let e = entries[i * n + j];
                if e as usize >= space.len() {
                    return Err(Error::InvalidGraph(format!("label {e} at ({i}, {j})")));
                }
                if e != entries[j * n + i] {
                    return Err(Error::InvalidGraph(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { space, n, entries })
    }

    /// Builds a graph from a labelling of the upper triangle `i < j`.
    pub fn from_upper<F>(space: DecorationSpace, n: usize, mut label: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> usize,
    {
        let zero = space.zero_index() as u16;
        let mut entries = vec![zero; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let l = label(i, j);
                if l >= space.len() {
                    return Err(Error::InvalidGraph(format!("label {l} at ({i}, {j})")));
                }
                entries[i * n + j] = l as u16;
                entries[j * n + i] = l as u16;
            }
        }
        Ok(Self { space, n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &DecorationSpace {
        &self.space
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.n + j] as usize
    }

    /// Row-major decoration indices.
    pub fn entries(&self) -> &[u16] {
        &self.entries
    }

    /// Number of off-diagonal entries in row `i` carrying a non-zero label.
    pub fn degree(&self, i: usize) -> usize {
        let zero = self.space.zero_index() as u16;
        self.entries[i * self.n..(i + 1) * self.n]
            .iter()
            .filter(|&&e| e != zero)
            .count()
    }
}

/// `n x n x L` array whose `(i, j)` slice should be a vertex of the simplex.
///
/// Conditionally on the latent positions, `E[X_ij] = theta_ij`, which is what
/// makes least squares on `X` a sensible estimator of `theta`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneHotTensor {
    n: usize,
    len: usize,
    values: Vec<f64>,
}

impl OneHotTensor {
    /// Wraps raw values laid out as `(i * n + j) * L + l`. Only the shape is
    /// checked; [`decode_one_hot`] validates the one-hot structure.
    pub fn from_values(n: usize, len: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n * len {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values, got {}",
                n * n * len,
                values.len()
            )));
        }
        Ok(Self { n, len, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Size of the decoration axis.
    pub fn decorations(&self) -> usize {
        self.len
    }

    pub fn slice(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.n + j) * self.len;
        &self.values[start..start + self.len]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Decoration index of every entry, row-major.
    pub fn labels(&self) -> Result<Vec<u16>> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let slice = self.slice(i, j);
                let mut hot = None;
                for (l, &v) in slice.iter().enumerate() {
                    if v == 1.0 && hot.is_none() {
                        hot = Some(l);
                    } else if v != 0.0 {
                        return Err(Error::NonOneHotRow { i, j });
                    }
                }
                out.push(hot.ok_or(Error::NonOneHotRow { i, j })? as u16);
            }
        }
        Ok(out)
    }
}

pub fn encode_one_hot(graph: &DecoratedGraph) -> OneHotTensor {
    let len = graph.space.len();
    let mut values = vec![0.0; graph.entries.len() * len];
    for (idx, &e) in graph.entries.iter().enumerate() {
        values[idx * len + e as usize] = 1.0;
    }
    OneHotTensor {
        n: graph.n,
        len,
        values,
    }
}

pub fn decode_one_hot(tensor: &OneHotTensor, space: &DecorationSpace) -> Result<DecoratedGraph> {
    if tensor.len != space.len() {
        return Err(Error::DimensionMismatch(format!(
            "tensor has {} decorations, space has {}",
            tensor.len,
            space.len()
        )));
    }
    DecoratedGraph::new(space.clone(), tensor.n, tensor.labels()?)
}

/// Symmetric square 0/1 matrix, one layer of a multiplex network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryMatrix {
    n: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} columns, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidGraph(format!("non-binary value {v}")));
                }
                m.data[i * n + j] = v;
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.n + j] == 1
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_edge(&mut self, i: usize, j: usize, on: bool) {
        self.data[i * self.n + j] = on as u8;
        self.data[j * self.n + i] = on as u8;
    }

    pub fn degree(&self, i: usize) -> usize {
        self.data[i * self.n..(i + 1) * self.n]
            .iter()
            .map(|&v| v as usize)
            .sum()
    }

    fn first_defect(&self) -> Option<(usize, usize)> {
        (0..self.n).find_map(|i| {
            if self.get(i, i) {
                return Some((i, i));
            }
            (i + 1..self.n)
                .find(|&j| self.get(i, j) != self.get(j, i))
                .map(|j| (i, j))
        })
    }
}

/// Encodes `T` layers as one decorated graph over `{0,1}^T`: the label of
/// pair `(i, j)` is `sum_t layer_t[i][j] * 2^t`.
pub fn multiplex_to_decorated(layers: &[BinaryMatrix]) -> Result<DecoratedGraph> {
    let first = layers
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no layers".into()))?;
    let n = first.n;
    for (t, layer) in layers.iter().enumerate() {
        if layer.n != n {
            return Err(Error::DimensionMismatch(format!(
                "layer {t} has {} nodes, layer 0 has {n}",
                layer.n
            )));
        }
        if let Some((i, j)) = layer.first_defect() {
            return Err(Error::AsymmetricLayer { layer: t, i, j });
        }
    }
    let space = DecorationSpace::multiplex(layers.len())?;
    let entries = (0..n * n)
        .map(|idx| {
            layers
                .iter()
                .enumerate()
                .map(|(t, layer)| (layer.data[idx] as u16) << t)
                .sum()
        })
        .collect();
    Ok(DecoratedGraph { space, n, entries })
}

/// Bit-extraction inverse of [`multiplex_to_decorated`].
pub fn decorated_to_layers(graph: &DecoratedGraph, layers: usize) -> Result<Vec<BinaryMatrix>> {
    if graph.space.multiplex_layers() != Some(layers) {
        return Err(Error::NotAPowerOfTwoSpace(graph.space.len()));
    }
    Ok((0..layers)
        .map(|t| BinaryMatrix {
            n: graph.n,
            data: graph.entries.iter().map(|&e| (e >> t & 1) as u8).collect(),
        })
        .collect())
}

/// Two marginals and the Pearson correlation of a distribution on `{0,1}^2`.
///
/// `rho` is `None` when either marginal is 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateBernoulliParams {
    pub p1: f64,
    pub p2: f64,
    pub rho: Option<f64>,
}

impl BivariateBernoulliParams {
    /// Inverse map back to the probability vector in order `00, 10, 01, 11`.
    /// Requires a defined correlation.
    pub fn to_theta(&self) -> Option<[f64; 4]> {
        let rho = self.rho?;
        let (p1, p2) = (self.p1, self.p2);
        let p11 = rho * (p1 * (1.0 - p1) * p2 * (1.0 - p2)).sqrt() + p1 * p2;
        Some([1.0 - p1 - p2 + p11, p1 - p11, p2 - p11, p11])
    }
}

/// Reparameterizes a probability vector over `00, 10, 01, 11`.
pub fn bernoulli2_reparam(theta: &[f64]) -> Result<BivariateBernoulliParams> {
    let sum: f64 = theta.iter().sum();
    if theta.len() != 4 || theta.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotASimplexPoint(theta.to_vec()));
    }
    let p1 = theta[1] + theta[3];
    let p2 = theta[2] + theta[3];
    let var = p1 * (1.0 - p1) * p2 * (1.0 - p2);
    let degenerate = p1 <= 0.0 || p1 >= 1.0 || p2 <= 0.0 || p2 >= 1.0 || var <= 0.0;
    // Perfect (anti-)dependence is detected from the zero pattern so that it
    // maps to exactly +-1 rather than whatever the rounding gives.
    let rho = (!degenerate).then(|| {
        if theta[1] == 0.0 && theta[2] == 0.0 {
            1.0
        } else if theta[0] == 0.0 && theta[3] == 0.0 {
            -1.0
        } else {
            ((theta[3] - p1 * p2) / var.sqrt()).clamp(-1.0, 1.0)
        }
    });
    Ok(BivariateBernoulliParams { p1, p2, rho })
}
