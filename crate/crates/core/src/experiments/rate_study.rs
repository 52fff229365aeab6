//! Simulation study of the estimation error as the network grows.

use std::fmt::Write;
use std::fs;

use super::config::{ExperimentConfig, Mode};
use super::write_artifact;
use crate::error::{Error, Result};
use crate::estimator::{fit_with, rate_rule_k, FitConfig};
use crate::format::sig17;
use crate::graphon::sample_graph;
use crate::metrics::{mise_oracle, mse, rate_reference, EvaluationReport};
use crate::parallel::{self, Execution};
use crate::rng::derive_seed;

/// Per-`n` aggregate over repetitions.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub n: usize,
    pub mean_mse: f64,
    /// Sample standard deviation over repetitions divided by `sqrt(reps)`;
    /// zero for a single repetition.
    pub std_err: f64,
    pub rate_reference: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateStudy {
    pub reports: Vec<EvaluationReport>,
    pub summary: Vec<SummaryRow>,
}

impl RateStudy {
    pub const SUMMARY_HEADER: &'static str = "n,mean_mse,std_err,rate_reference,ratio";

    pub fn results_csv(&self) -> String {
        let mut out = String::from(EvaluationReport::CSV_HEADER);
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from(Self::SUMMARY_HEADER);
        out.push('\n');
        for r in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                sig17(r.mean_mse),
                sig17(r.std_err),
                sig17(r.rate_reference),
                sig17(r.ratio)
            );
        }
        out
    }
}

pub fn run_rate_study(config: &ExperimentConfig) -> Result<RateStudy> {
    run_rate_study_with(config, Execution::default())
}

/// Runs every `(n, repetition)` job, possibly concurrently, and writes
/// `results.csv` and `summary.csv` to `config.output_dir`. Rows are ordered
/// by `n` then repetition whatever the execution mode.
pub fn run_rate_study_with(config: &ExperimentConfig, exec: Execution) -> Result<RateStudy> {
    config.validate()?;
    if config.mode != Mode::RateStudy {
        return Err(Error::InvalidConfig("mode must be rate-study".into()));
    }
    let spec = config
        .graphon
        .as_ref()
        .expect("validated")
        .to_spec()?;
    let alpha = config
        .alpha
        .or(spec.alpha())
        .ok_or_else(|| Error::InvalidConfig(format!("no alpha for graphon {}", spec.id())))?;
    let jobs: Vec<(usize, usize)> = config
        .n_grid
        .iter()
        .flat_map(|&n| (0..config.repetitions).map(move |r| (n, r)))
        .collect();
    let reports = parallel::map(exec, &jobs, |&(n, r)| -> Result<EvaluationReport> {
        let seed = derive_seed(config.seed, &[n as u64, r as u64]);
        let sample = sample_graph(&spec, n, seed)?;
        let fit_cfg = FitConfig {
            k: Some(config.k.unwrap_or_else(|| rate_rule_k(n, alpha))),
            ..config.fit_config(seed)
        };
        let fit = fit_with(&sample.graph, &fit_cfg, Execution::Sequential)?;
        let err = mse(&fit.theta_hat(), &sample.theta_true)?;
        let mise = if config.compute_mise {
            Some(mise_oracle(&fit, &spec, &sample.xi, config.mise_grid)?)
        } else {
            None
        };
        Ok(EvaluationReport {
            n,
            decorations: spec.space().len(),
            k: fit.assignment.k(),
            s: fit.assignment.s(),
            alpha,
            seed,
            mse: err,
            mise,
            rate_reference: rate_reference(n, alpha),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let summary = config
        .n_grid
        .iter()
        .map(|&n| {
            let values: Vec<f64> = reports.iter().filter(|r| r.n == n).map(|r| r.mse).collect();
            let m = values.len() as f64;
            let mean = values.iter().sum::<f64>() / m;
            let std_err = if values.len() > 1 {
                let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
                (var / m).sqrt()
            } else {
                0.0
            };
            let rate = rate_reference(n, alpha);
            SummaryRow {
                n,
                mean_mse: mean,
                std_err,
                rate_reference: rate,
                ratio: mean / rate,
            }
        })
        .collect();
    let study = RateStudy { reports, summary };

    let results_path = config.output_dir.join("results.csv");
    let summary_path = config.output_dir.join("summary.csv");
    let written = write_artifact(&results_path, &study.results_csv())
        .and_then(|_| write_artifact(&summary_path, &study.summary_csv()));
    if let Err(e) = written {
        let _ = fs::remove_file(&results_path);
        let _ = fs::remove_file(&summary_path);
        return Err(e);
    }
    Ok(study)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::GraphonDocument;

    fn small_config(dir: &std::path::Path) -> ExperimentConfig {
        ExperimentConfig {
            mode: Mode::RateStudy,
            graphon: Some(GraphonDocument::named("W3")),
            n_grid: vec![40, 60],
            repetitions: 2,
            seed: 5,
            alpha: None,
            output_dir: dir.to_path_buf(),
            k: None,
            s: None,
            starts: 1,
            max_sweeps: 100,
            compute_mise: true,
            mise_grid: 50,
            ingestion: None,
        }
    }

    #[test]
    fn row_count_and_reproducibility() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path());
        let a = run_rate_study(&cfg).unwrap();
        assert_eq!(a.reports.len(), 4);
        let first = fs::read(dir.path().join("results.csv")).unwrap();
        let b = run_rate_study_with(&cfg, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(first, fs::read(dir.path().join("results.csv")).unwrap());
        let text = String::from_utf8(first).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("n,L,k,s,alpha,seed,mse,mise,rate_reference\n"));
        assert!(!text.contains('\r'));
        assert!(a.reports.iter().all(|r| r.mise.is_some() && r.mse <= 2.0));
    }

    #[test]
    fn failure_leaves_no_partial_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.k = Some(1000);
        assert!(run_rate_study(&cfg).is_err());
        assert!(!dir.path().join("results.csv").exists());
    }
}
