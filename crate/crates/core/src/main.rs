use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use decograph::experiments::{fit_dataset, run_rate_study, ExperimentConfig, Mode, RateStudy};
use decograph::format::sig17;
use decograph::{sample_graph, Error, GraphonDocument, Result};

#[derive(Parser)]
#[command(name = "decograph", version, about = "Decorated graphon estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample graphs over a grid of sizes, fit each one and write results.csv and summary.csv.
    RateStudy {
        #[arg(long)]
        config: PathBuf,
    },
    /// Ingest a multiplex edge-list dataset, fit it and write fit.json, membership.csv and heatmaps.
    Fit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample one decorated graph from a named graphon and write it as JSON.
    Sample {
        /// W1, W2 or W3.
        #[arg(long)]
        graphon: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf, mode: Mode) -> Result<ExperimentConfig> {
    let cfg = ExperimentConfig::load(path)?;
    if cfg.mode != mode {
        return Err(Error::InvalidConfig(format!(
            "{} has mode {:?}, expected {mode:?}",
            path.display(),
            cfg.mode
        )));
    }
    Ok(cfg)
}

fn print_summary(study: &RateStudy) {
    println!("{:>6} {:>24} {:>24} {:>24}", "n", "mean_mse", "rate_reference", "ratio");
    for row in &study.summary {
        println!(
            "{:>6} {:>24} {:>24} {:>24}",
            row.n,
            sig17(row.mean_mse),
            sig17(row.rate_reference),
            sig17(row.ratio)
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::RateStudy { config } => {
            let cfg = load(&config, Mode::RateStudy)?;
            let study = run_rate_study(&cfg)?;
            print_summary(&study);
            println!("wrote {}", cfg.output_dir.display());
        }
        Command::Fit { config } => {
            let cfg = load(&config, Mode::Fit)?;
            let out = fit_dataset(&cfg)?;
            println!(
                "n={} k={} s={} bic={}",
                out.fit.n(),
                out.fit.assignment.k(),
                out.fit.assignment.s(),
                sig17(out.fit.bic)
            );
            for f in &out.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sample { graphon, n, seed, out } => {
            let spec = GraphonDocument::named(&graphon).to_spec()?;
            let doc = sample_graph(&spec, n, seed)?.to_document(&spec)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&out, doc.to_json())?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
