use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::FitConfig;
use crate::graphon::GraphonDocument;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RateStudy,
    Fit,
    Sample,
}

/// How edge weights are compared with a layer's threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Keep edges with `weight >= threshold`.
    #[default]
    AtLeast,
    /// Keep edges with `weight > threshold`.
    GreaterThan,
}

impl Comparison {
    pub fn keeps(self, weight: f64, threshold: f64) -> bool {
        match self {
            Comparison::AtLeast => weight >= threshold,
            Comparison::GreaterThan => weight > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSource {
    /// Tab-separated `source`, `target`, `weight` with a header line.
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    pub threshold: f64,
    #[serde(default)]
    pub comparison: Comparison,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestionConfig {
    pub layers: Vec<LayerSource>,
    #[serde(default)]
    pub min_degree: usize,
}

/// JSON experiment description; see the README for a field-by-field guide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub graphon: Option<GraphonDocument>,
    #[serde(default = "default_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    /// Smoothness used for `k` and the rate reference; defaults to the
    /// graphon's own exponent.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub s: Option<usize>,
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_sweeps")]
    pub max_sweeps: usize,
    #[serde(default)]
    pub compute_mise: bool,
    #[serde(default = "default_mise_grid")]
    pub mise_grid: usize,
    #[serde(default)]
    pub ingestion: Option<IngestionConfig>,
}

fn default_grid() -> Vec<usize> {
    vec![100, 200, 300, 400, 500, 600]
}

fn default_repetitions() -> usize {
    5
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_starts() -> usize {
    1
}

fn default_sweeps() -> usize {
    100
}

fn default_mise_grid() -> usize {
    200
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file, resolving relative paths against its directory.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or_else(|| std::path::Path::new("."));
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        if let Some(ing) = cfg.ingestion.as_mut() {
            for layer in &mut ing.layers {
                if layer.path.is_relative() {
                    layer.path = base.join(&layer.path);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.starts == 0 {
            return bad("starts must be at least 1".into());
        }
        if self.mode == Mode::RateStudy {
            if self.graphon.is_none() {
                return bad("rate-study needs a graphon".into());
            }
            if self.n_grid.is_empty() || self.n_grid[0] < 4 {
                return bad("n_grid must be non-empty with n >= 4".into());
            }
            if self.compute_mise && self.mise_grid < 50 {
                return bad("mise_grid must be at least 50".into());
            }
        }
        if let Some(ing) = &self.ingestion {
            if ing.layers.is_empty() {
                return bad("ingestion needs at least one layer".into());
            }
            if let Some(l) = ing.layers.iter().find(|l| !(l.threshold >= 0.0)) {
                return bad(format!("negative threshold for {}", l.path.display()));
            }
        }
        if self.mode == Mode::Fit && self.ingestion.is_none() {
            return bad("fit needs an ingestion block".into());
        }
        Ok(())
    }

    pub fn fit_config(&self, seed: u64) -> FitConfig {
        FitConfig {
            k: self.k,
            s: self.s,
            alpha_hint: None,
            max_sweeps: self.max_sweeps,
            seed,
            starts: self.starts,
            tolerance: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_rate_study() {
        let cfg = ExperimentConfig::from_json(
            r#"{"mode": "rate-study", "graphon": {"id": "W1"}, "seed": 3}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_grid, vec![100, 200, 300, 400, 500, 600]);
        assert_eq!(cfg.repetitions, 5);
        assert_eq!(cfg.mode, Mode::RateStudy);
    }

    #[test]
    fn rejects_bad_grids_and_thresholds() {
        for text in [
            r#"{"mode": "rate-study", "graphon": {"id": "W1"}, "n_grid": [200, 100]}"#,
            r#"{"mode": "rate-study", "graphon": {"id": "W1"}, "repetitions": 0}"#,
            r#"{"mode": "rate-study"}"#,
            r#"{"mode": "fit"}"#,
            r#"{"mode": "fit", "ingestion": {"layers": [{"path": "a.tsv", "threshold": -1}]}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }

    #[test]
    fn comparison_modes() {
        assert!(Comparison::AtLeast.keeps(1.0, 1.0));
        assert!(!Comparison::GreaterThan.keeps(100.0, 100.0));
        assert!(Comparison::GreaterThan.keeps(120.0, 100.0));
    }
}
