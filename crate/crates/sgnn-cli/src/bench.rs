//! Benchmark grid execution: (fraction × method × seed) cells over one
//! dataset, producing one CSV row per cell.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use sgnn::classifier::{evaluate, evaluate_exact, ClassifierConfig, ClassifierError};
use sgnn::data::{self, DataError, Dataset, SplitSpec};
use sgnn::graph::{build_knn_graph, GraphError, Metric};
use sgnn::optimizer::AnnealParams;
use sgnn::seeds;

use crate::bench_config::{BenchConfig, DataSource, Method};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// Header of the bench CSV: the evaluation columns plus a status column.
pub fn csv_header() -> String {
    format!("{},status", sgnn::classifier::EVAL_CSV_HEADER)
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub method: Method,
    pub fraction: f64,
    pub seed: u64,
    pub row: String,
}

fn run_cell(
    cfg: &BenchConfig,
    train_base: &Dataset,
    test: &Dataset,
    method: Method,
    fraction: f64,
    seed: u64,
) -> Result<String, BenchError> {
    let train = data::subset(train_base, fraction, seed)?;
    let steps = if cfg.steps == 0 {
        AnnealParams::auto_steps(train.len())
    } else {
        cfg.steps
    };
    let mut report = match method {
        Method::Exact => evaluate_exact(&train, test, cfg.k, Metric::Euclidean, cfg.weighted, seed)?,
        Method::Sgnn(walk) => {
            let graph = build_knn_graph(&train, cfg.graph_n, Metric::Euclidean)?;
            let classifier = ClassifierConfig {
                vote_k: cfg.k,
                graph_n: cfg.graph_n,
                anneal: AnnealParams::new(cfg.restarts, steps, walk, cfg.k, seed),
                metric: Metric::Euclidean,
                weighted: cfg.weighted,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, 0));
            evaluate(&graph, &train, test, &classifier, &mut rng)?
        }
    };
    report.subset_fraction = fraction;
    report.seed = seed;
    Ok(format!("{},ok", report.to_csv_row()))
}

/// Loads (or generates) the dataset named by the config and returns the
/// fixed (train, test) sides the whole grid shares.
pub fn prepare_data(cfg: &BenchConfig) -> Result<(Dataset, Dataset), BenchError> {
    match &cfg.data {
        DataSource::Csv {
            train,
            test,
            label_column,
        } => {
            let train_ds = data::load_csv(train, Some(label_column))?;
            match test {
                Some(path) => Ok((train_ds, data::load_csv(path, Some(label_column))?)),
                None => {
                    let spec = SplitSpec::new(cfg.train_fraction, 1.0, cfg.split_seed)?;
                    Ok(data::split(&train_ds, &spec)?)
                }
            }
        }
        DataSource::Synth {
            clusters,
            per_cluster,
            dim,
            separation,
            seed,
        } => {
            let full =
                data::make_gaussian_clusters(*clusters, *per_cluster, *dim, *separation, *seed)?;
            let spec = SplitSpec::new(cfg.train_fraction, 1.0, cfg.split_seed)?;
            Ok(data::split(&full, &spec)?)
        }
    }
}

/// Runs every grid cell (in parallel) and returns rows in deterministic
/// (fraction, method, seed) order. A failing cell contributes an error row;
/// the run continues.
pub fn run_grid(cfg: &BenchConfig, train: &Dataset, test: &Dataset) -> Vec<CellOutcome> {
    let mut cells: Vec<(f64, Method, u64)> = Vec::new();
    for &fraction in &cfg.fractions {
        for &method in &cfg.methods {
            for &seed in &cfg.seeds {
                cells.push((fraction, method, seed));
            }
        }
    }
    cells
        .into_par_iter()
        .map(|(fraction, method, seed)| {
            let row = match run_cell(cfg, train, test, method, fraction, seed) {
                Ok(row) => row,
                Err(e) => {
                    let msg = e.to_string().replace(',', ";");
                    format!("{method},{fraction},{seed},0,0,,,,,,error: {msg}")
                }
            };
            CellOutcome {
                method,
                fraction,
                seed,
                row,
            }
        })
        .collect()
}
