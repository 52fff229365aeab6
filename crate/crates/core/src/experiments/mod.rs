//! Experiment drivers behind the `decograph` command line: rate studies on
//! analytic graphons, ingestion and fitting of multiplex edge lists, and the
//! CSV / JSON / SVG artifacts they produce.

mod config;
mod dataset;
mod heatmap;
mod ingest;
mod rate_study;

pub use config::{Comparison, ExperimentConfig, IngestionConfig, LayerSource, Mode};
pub use dataset::{fit_dataset, fit_dataset_with, membership_csv, DatasetOutput};
pub use heatmap::{emit_heatmap, render_heatmap, UNDEFINED_FILL};
pub use ingest::{ingest_multiplex, MultiplexDataset, Provenance, Removal};
pub use rate_study::{run_rate_study, run_rate_study_with, RateStudy, SummaryRow};

use std::fs;
use std::path::Path;

use crate::error::Result;

/// Writes `contents` to `path`, removing the file again if the write fails.
pub(crate) fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents).inspect_err(|_| {
        let _ = fs::remove_file(path);
    })?;
    Ok(())
}
