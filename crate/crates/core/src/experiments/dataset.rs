//! Fitting an ingested multiplex network and writing its artifacts.

use std::fmt::Write;
use std::fs;
use std::path::PathBuf;

use super::config::{ExperimentConfig, Mode};
use super::heatmap::render_heatmap;
use super::ingest::{ingest_multiplex, MultiplexDataset};
use super::write_artifact;
use crate::decoration::multiplex_to_decorated;
use crate::error::{Error, Result};
use crate::estimator::{fit_with, Fit};
use crate::metrics::correlation_surface;
use crate::parallel::Execution;

/// Largest number of layers accepted by `fit`; beyond this the number of
/// decorations grows past what a heatmap per decoration can usefully show.
const MAX_LAYERS: usize = 3;

#[derive(Clone, Debug)]
pub struct DatasetOutput {
    pub dataset: MultiplexDataset,
    pub fit: Fit,
    /// Every file written, in write order.
    pub files: Vec<PathBuf>,
}

/// `node_id,group,shapes` with one row per node in sorted-id order. `shapes`
/// lists the shape indices of the node's row of blocks, `;`-separated.
pub fn membership_csv(dataset: &MultiplexDataset, fit: &Fit) -> String {
    let map = fit.assignment.shape_map();
    let mut out = String::from("node_id,group,shapes\n");
    for (i, id) in dataset.node_ids.iter().enumerate() {
        let g = fit.assignment.node_labels()[i];
        let shapes: Vec<String> = (0..map.k()).map(|h| map.get(g, h).to_string()).collect();
        let _ = writeln!(out, "{id},{g},{}", shapes.join(";"));
    }
    out
}

/// Block-constant surface in canonical node order, diagonal included.
fn surface(fit: &Fit, value: impl Fn(usize, usize) -> Option<f64>) -> Vec<Option<f64>> {
    let order = &fit.node_order;
    order
        .iter()
        .flat_map(|&i| order.iter().map(move |&j| (i, j)))
        .map(|(i, j)| value(i, j))
        .collect()
}

pub fn fit_dataset(config: &ExperimentConfig) -> Result<DatasetOutput> {
    fit_dataset_with(config, Execution::default())
}

pub fn fit_dataset_with(config: &ExperimentConfig, exec: Execution) -> Result<DatasetOutput> {
    config.validate()?;
    if config.mode != Mode::Fit {
        return Err(Error::InvalidConfig("mode must be fit".into()));
    }
    let ingestion = config.ingestion.as_ref().expect("validated");
    if ingestion.layers.len() > MAX_LAYERS {
        return Err(Error::InvalidConfig(format!(
            "at most {MAX_LAYERS} layers are supported, got {}",
            ingestion.layers.len()
        )));
    }
    let dataset = ingest_multiplex(ingestion)?;
    let graph = multiplex_to_decorated(&dataset.layers)?;
    let fit = fit_with(&graph, &config.fit_config(config.seed), exec)?;
    let n = fit.n();
    let dir = &config.output_dir;

    let mut artifacts: Vec<(PathBuf, String)> = vec![
        (dir.join("fit.json"), fit.to_json()),
        (dir.join("membership.csv"), membership_csv(&dataset, &fit)),
        (dir.join("provenance.txt"), dataset.provenance.to_text()),
    ];
    for (l, label) in fit.space.labels().iter().enumerate() {
        let values = surface(&fit, |i, j| Some(fit.shape_value(i, j)[l]));
        artifacts.push((dir.join(format!("heatmap_{label}.svg")), render_heatmap(&values, n)?));
    }
    if fit.space.multiplex_layers() == Some(2) {
        let corr = correlation_surface(&fit)?;
        let to_opt = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();
        let rho: Vec<Option<f64>> = corr.rho.iter().map(|r| r.map(|r| (r + 1.0) / 2.0)).collect();
        artifacts.push((dir.join("marginal_layer1.svg"), render_heatmap(&to_opt(&corr.p1), n)?));
        artifacts.push((dir.join("marginal_layer2.svg"), render_heatmap(&to_opt(&corr.p2), n)?));
        artifacts.push((dir.join("correlation.svg"), render_heatmap(&rho, n)?));
    }

    let mut files = Vec::with_capacity(artifacts.len());
    for (path, contents) in artifacts {
        if let Err(e) = write_artifact(&path, &contents) {
            for written in &files {
                let _ = fs::remove_file(written);
            }
            return Err(e);
        }
        files.push(path);
    }
    Ok(DatasetOutput { dataset, fit, files })
}
