//! Multiplex edge-list ingestion.
//!
//! Each layer is read from a weighted, undirected TSV edge list and
//! binarized against its own threshold. The common node set is the
//! intersection of the node sets of all layers; nodes whose degree falls
//! below `min_degree` in any layer are then removed repeatedly until none
//! remain, since one removal can push a neighbour under the bound.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use super::config::{IngestionConfig, LayerSource};
use crate::decoration::BinaryMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Removal {
    pub node: String,
    /// Filtering round, starting at 1.
    pub round: usize,
    /// First layer in which the degree was too low, and that degree.
    pub layer: usize,
    pub degree: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub steps: Vec<String>,
    pub removals: Vec<Removal>,
}

impl Provenance {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(s);
            out.push('\n');
        }
        for r in &self.removals {
            out.push_str(&format!(
                "removed {} in round {} (degree {} in layer {})\n",
                r.node, r.round, r.degree, r.layer
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplexDataset {
    /// Node identifiers in lexicographic order; matrix index `i` is `node_ids[i]`.
    pub node_ids: Vec<String>,
    pub layers: Vec<BinaryMatrix>,
    pub provenance: Provenance,
}

struct RawLayer {
    nodes: BTreeSet<String>,
    /// Max weight per unordered pair, keyed with the smaller id first.
    weights: HashMap<(String, String), f64>,
    self_loops: usize,
}

fn parse_layer(path: &Path) -> Result<RawLayer> {
    let text = fs::read_to_string(path)?;
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        None => return Err(err(1, "missing header line".into())),
        Some((_, header)) => {
            let fields: Vec<&str> = header.split('\t').collect();
            if fields.len() != 3 || fields[2].trim().parse::<f64>().is_ok() {
                return Err(err(1, "expected a header line `source<TAB>target<TAB>weight`".into()));
            }
        }
    }
    let mut layer = RawLayer {
        nodes: BTreeSet::new(),
        weights: HashMap::new(),
        self_loops: 0,
    };
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(err(idx + 1, format!("expected 3 tab-separated fields, got {}", fields.len())));
        }
        let (a, b) = (fields[0].trim(), fields[1].trim());
        if a.is_empty() || b.is_empty() {
            return Err(err(idx + 1, "empty node identifier".into()));
        }
        let w: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| err(idx + 1, format!("invalid weight {:?}", fields[2])))?;
        if !w.is_finite() {
            return Err(err(idx + 1, format!("non-finite weight {w}")));
        }
        layer.nodes.insert(a.to_string());
        layer.nodes.insert(b.to_string());
        if a == b {
            layer.self_loops += 1;
            continue;
        }
        let key = if a < b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        let slot = layer.weights.entry(key).or_insert(w);
        *slot = slot.max(w);
    }
    Ok(layer)
}

fn binarize(raw: &RawLayer, source: &LayerSource, index: &BTreeMap<&str, usize>) -> (BinaryMatrix, usize) {
    let mut m = BinaryMatrix::zeros(index.len());
    let mut kept = 0;
    for ((a, b), &w) in &raw.weights {
        if !source.comparison.keeps(w, source.threshold) {
            continue;
        }
        if let (Some(&i), Some(&j)) = (index.get(a.as_str()), index.get(b.as_str())) {
            m.set_edge(i, j, true);
            kept += 1;
        }
    }
    (m, kept)
}

pub fn ingest_multiplex(config: &IngestionConfig) -> Result<MultiplexDataset> {
    let mut provenance = Provenance::default();
    let raws = config
        .layers
        .iter()
        .map(|l| parse_layer(&l.path))
        .collect::<Result<Vec<_>>>()?;
    let mut common: BTreeSet<String> = raws[0].nodes.clone();
    for raw in &raws[1..] {
        common = common.intersection(&raw.nodes).cloned().collect();
    }
    let mut alive: Vec<String> = common.into_iter().collect();
    provenance.steps.push(format!("{} nodes common to all {} layers", alive.len(), raws.len()));

    let mut round = 0;
    loop {
        let index: BTreeMap<&str, usize> =
            alive.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let layers: Vec<(BinaryMatrix, usize)> = raws
            .iter()
            .zip(&config.layers)
            .map(|(raw, src)| binarize(raw, src, &index))
            .collect();
        if round == 0 {
            for (t, ((_, kept), (raw, src))) in
                layers.iter().zip(raws.iter().zip(&config.layers)).enumerate()
            {
                provenance.steps.push(format!(
                    "layer {t} ({}): {} distinct pairs, {} self-loops ignored, {kept} kept with weight {} {}",
                    src.path.file_name().unwrap_or(src.path.as_os_str()).to_string_lossy(),
                    raw.weights.len(),
                    raw.self_loops,
                    match src.comparison {
                        super::Comparison::AtLeast => ">=",
                        super::Comparison::GreaterThan => ">",
                    },
                    src.threshold
                ));
            }
        }
        round += 1;
        let mut removed = Vec::new();
        for (i, id) in alive.iter().enumerate() {
            let low = layers
                .iter()
                .enumerate()
                .map(|(t, (m, _))| (t, m.degree(i)))
                .find(|&(_, d)| d < config.min_degree);
            if let Some((layer, degree)) = low {
                removed.push(Removal {
                    node: id.clone(),
                    round,
                    layer,
                    degree,
                });
            }
        }
        if removed.is_empty() {
            provenance.steps.push(format!(
                "degree filter (min {}) stable after {} round(s): {} nodes retained",
                config.min_degree,
                round - 1,
                alive.len()
            ));
            if alive.is_empty() {
                return Err(Error::EmptyAfterFilter);
            }
            return Ok(MultiplexDataset {
                node_ids: alive,
                layers: layers.into_iter().map(|(m, _)| m).collect(),
                provenance,
            });
        }
        let gone: BTreeSet<&str> = removed.iter().map(|r| r.node.as_str()).collect();
        alive = alive
            .iter()
            .filter(|id| !gone.contains(id.as_str()))
            .cloned()
            .collect();
        provenance.removals.extend(removed);
    }
}
