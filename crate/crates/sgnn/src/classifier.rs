//! K-nearest-neighbor classification over a proximity graph, with an exact
//! brute-force twin used as the oracle baseline.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::graph::{Metric, ProximityGraph};
use crate::objective::{ObjectiveError, QueryObjective};
use crate::optimizer::{exhaustive_search, sgnn_search, AnnealParams, OptimError};
use crate::seeds;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("training set has no labels")]
    MissingLabels,
    #[error("test set has no labels")]
    MissingTestLabels,
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("graph has {graph} nodes but training set has {train} rows")]
    GraphSizeMismatch { graph: usize, train: usize },
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

/// Configuration of the graph-based classifier.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Neighbors used in the vote (K).
    pub vote_k: usize,
    /// Degree parameter the proximity graph was built with (echoed in
    /// reports).
    pub graph_n: usize,
    pub anneal: AnnealParams,
    pub metric: Metric,
    /// Weight votes by inverse distance instead of counting.
    #[serde(default)]
    pub weighted: bool,
}

/// Evaluation summary over a test set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub accuracy: f64,
    /// Half-width of the bootstrap 95% confidence interval on accuracy
    /// (1000 resamples over test rows).
    pub ci95: f64,
    /// Mean distance evaluations per query.
    pub mean_evals: f64,
    pub total_evals: u64,
    pub wall_time_s: f64,
    pub n_train: usize,
    pub n_queries: usize,
    /// Queries where fewer than K candidates were found.
    pub short_queries: usize,
    /// Training-size fraction this run used (1.0 when not subsampled).
    pub subset_fraction: f64,
    pub seed: u64,
    /// Resolved configuration, for reproducibility.
    pub params: serde_json::Value,
    /// Per-query predicted class ids (not serialized; accuracy can be
    /// recomputed from these against the test labels).
    #[serde(skip)]
    pub predictions: Vec<u32>,
}

pub const EVAL_CSV_HEADER: &str = "method,subset_fraction,seed,n_train,n_queries,accuracy,ci95,mean_evals,total_evals,wall_time_s";

impl EvalReport {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.subset_fraction,
            self.seed,
            self.n_train,
            self.n_queries,
            self.accuracy,
            self.ci95,
            self.mean_evals,
            self.total_evals,
            self.wall_time_s
        )
    }
}

/// Majority vote over scored candidates. Ties break to the label with the
/// smaller summed distance, then to the lexicographically smaller label
/// (class ids are ranked lexicographically by construction). The weighted
/// variant scores each label by summed inverse distance instead.
fn vote(candidates: &[(usize, f64)], labels: &[u32], weighted: bool) -> u32 {
    debug_assert!(!candidates.is_empty());
    let mut tally: BTreeMap<u32, (usize, f64, f64)> = BTreeMap::new();
    for &(node, distance) in candidates {
        let entry = tally.entry(labels[node]).or_insert((0, 0.0, 0.0));
        entry.0 += 1;
        entry.1 += distance;
        entry.2 += 1.0 / distance.max(1e-12);
    }
    let mut best: Option<(u32, (usize, f64, f64))> = None;
    for (label, score) in tally {
        let better = match &best {
            None => true,
            Some((_, incumbent)) => {
                if weighted {
                    score.2 > incumbent.2
                } else {
                    score.0 > incumbent.0 || (score.0 == incumbent.0 && score.1 < incumbent.1)
                }
            }
        };
        if better {
            best = Some((label, score));
        }
    }
    best.unwrap().0
}

struct QueryOutcome {
    label: u32,
    evaluations: u64,
    short: bool,
}

fn predict_outcome(
    g: &ProximityGraph,
    train: &Dataset,
    query: &[f64],
    cfg: &ClassifierConfig,
    seed: u64,
) -> Result<QueryOutcome, ClassifierError> {
    let labels = train.labels().ok_or(ClassifierError::MissingLabels)?;
    if g.node_count() != train.len() {
        return Err(ClassifierError::GraphSizeMismatch {
            graph: g.node_count(),
            train: train.len(),
        });
    }
    let mut objective = QueryObjective::new(train, query, cfg.metric)?;
    let mut params = cfg.anneal;
    params.k = cfg.vote_k;
    params.seed = seed;
    let result = sgnn_search(g, &mut objective, &params)?;
    Ok(QueryOutcome {
        label: vote(&result.candidates, labels, cfg.weighted),
        evaluations: result.evaluations,
        short: result.short,
    })
}

/// Predicts the label of `query` by majority vote over the approximate
/// K nearest training rows found by annealing search on the graph.
pub fn predict(
    g: &ProximityGraph,
    train: &Dataset,
    query: &[f64],
    cfg: &ClassifierConfig,
    rng: &mut impl Rng,
) -> Result<u32, ClassifierError> {
    Ok(predict_outcome(g, train, query, cfg, rng.gen())?.label)
}

/// Exact prediction: brute-force bottom-K by distance, same voting rule.
pub fn predict_exact(
    train: &Dataset,
    query: &[f64],
    k: usize,
    metric: Metric,
    weighted: bool,
) -> Result<u32, ClassifierError> {
    let labels = train.labels().ok_or(ClassifierError::MissingLabels)?;
    let mut objective = QueryObjective::new(train, query, metric)?;
    let result = exhaustive_search(&mut objective, k)?;
    Ok(vote(&result.candidates, labels, weighted))
}

fn bootstrap_ci95(correct: &[bool], seed: u64) -> f64 {
    let n = correct.len();
    if n < 2 {
        return 0.0;
    }
    let resamples = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accuracies: Vec<f64> = (0..resamples)
        .map(|_| {
            let hits = (0..n).filter(|_| correct[rng.gen_range(0..n)]).count();
            hits as f64 / n as f64
        })
        .collect();
    accuracies.sort_by(f64::total_cmp);
    let lo = accuracies[(0.025 * resamples as f64) as usize];
    let hi = accuracies[(0.975 * resamples as f64) as usize - 1];
    (hi - lo) / 2.0
}

fn build_report(
    method: &str,
    outcomes: Vec<(bool, u64, bool, u32)>,
    n_train: usize,
    wall_time_s: f64,
    seed: u64,
    params: serde_json::Value,
) -> EvalReport {
    let n = outcomes.len();
    let correct: Vec<bool> = outcomes.iter().map(|o| o.0).collect();
    let total_evals: u64 = outcomes.iter().map(|o| o.1).sum();
    let short_queries = outcomes.iter().filter(|o| o.2).count();
    let predictions = outcomes.iter().map(|o| o.3).collect();
    let accuracy = correct.iter().filter(|&&c| c).count() as f64 / n as f64;
    EvalReport {
        method: method.to_string(),
        accuracy,
        ci95: bootstrap_ci95(&correct, seeds::derive(seed, u64::MAX)),
        mean_evals: total_evals as f64 / n as f64,
        total_evals,
        wall_time_s,
        n_train,
        n_queries: n,
        short_queries,
        subset_fraction: 1.0,
        seed,
        params,
        predictions,
    }
}

/// Runs the graph-based classifier over every test row (rows in parallel,
/// each on its own RNG stream) and reports accuracy with a bootstrap 95%
/// confidence interval plus evaluation counters.
pub fn evaluate(
    g: &ProximityGraph,
    train: &Dataset,
    test: &Dataset,
    cfg: &ClassifierConfig,
    rng: &mut impl Rng,
) -> Result<EvalReport, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let test_labels = test.labels().ok_or(ClassifierError::MissingTestLabels)?;
    let master: u64 = rng.gen();
    let started = Instant::now();
    let outcomes: Vec<(bool, u64, bool, u32)> = (0..test.len())
        .into_par_iter()
        .map(|q| {
            let outcome =
                predict_outcome(g, train, test.row(q), cfg, seeds::derive(master, q as u64))?;
            Ok((
                outcome.label == test_labels[q],
                outcome.evaluations,
                outcome.short,
                outcome.label,
            ))
        })
        .collect::<Result<_, ClassifierError>>()?;
    let wall = started.elapsed().as_secs_f64();
    let method = format!("sgnn{}", cfg.anneal.walk_length);
    let params = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
    Ok(build_report(&method, outcomes, train.len(), wall, master, params))
}

/// Exact-classifier twin of [`evaluate`]: every query scans the whole
/// training set, so its evaluation count is exactly `n_train · n_queries`.
pub fn evaluate_exact(
    train: &Dataset,
    test: &Dataset,
    k: usize,
    metric: Metric,
    weighted: bool,
    seed: u64,
) -> Result<EvalReport, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let train_labels = train.labels().ok_or(ClassifierError::MissingLabels)?;
    let test_labels = test.labels().ok_or(ClassifierError::MissingTestLabels)?;
    let started = Instant::now();
    let outcomes: Vec<(bool, u64, bool, u32)> = (0..test.len())
        .into_par_iter()
        .map(|q| {
            let mut objective = QueryObjective::new(train, test.row(q), metric)?;
            let result = exhaustive_search(&mut objective, k)?;
            let label = vote(&result.candidates, train_labels, weighted);
            Ok((
                label == test_labels[q],
                result.evaluations,
                result.short,
                label,
            ))
        })
        .collect::<Result<_, ClassifierError>>()?;
    let wall = started.elapsed().as_secs_f64();
    let params = serde_json::json!({ "method": "exact", "k": k, "metric": metric, "weighted": weighted });
    Ok(build_report("exact", outcomes, train.len(), wall, seed, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_gaussian_clusters;
    use crate::graph::build_knn_graph;

    fn config(vote_k: usize, restarts: usize, walk: usize, graph_n: usize) -> ClassifierConfig {
        ClassifierConfig {
            vote_k,
            graph_n,
            anneal: AnnealParams::new(restarts, 7, walk, vote_k, 0),
            metric: Metric::Euclidean,
            weighted: false,
        }
    }

    #[test]
    fn exact_prediction_with_one_point_per_class() {
        let train = Dataset::new(
            vec![0.0, 0.0, 10.0, 10.0],
            2,
            Some(vec![0, 1]),
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let label = predict_exact(&train, &[9.0, 9.0], 1, Metric::Euclidean, false).unwrap();
        assert_eq!(train.class_name(label), "b");
    }

    #[test]
    fn exact_prediction_k_equals_n_is_the_majority_label() {
        let train = Dataset::new(
            vec![0.0, 1.0, 2.0, 50.0],
            1,
            Some(vec![0, 0, 0, 1]),
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        let label = predict_exact(&train, &[100.0], 4, Metric::Euclidean, false).unwrap();
        assert_eq!(label, 0);
    }

    #[test]
    fn exact_prediction_on_a_training_point_returns_its_label() {
        let train = make_gaussian_clusters(3, 30, 4, 10.0, 5).unwrap();
        for i in [0, 40, 75] {
            let label = predict_exact(&train, train.row(i), 1, Metric::Euclidean, false).unwrap();
            assert_eq!(label, train.label(i).unwrap());
        }
    }

    #[test]
    fn exact_prediction_is_invariant_under_row_permutation() {
        let train = make_gaussian_clusters(2, 25, 3, 8.0, 2).unwrap();
        let query = [4.0, 0.5, -0.5];
        let direct = predict_exact(&train, &query, 5, Metric::Euclidean, false).unwrap();
        let reversed: Vec<usize> = (0..train.len()).rev().collect();
        let permuted = train.select(&reversed);
        let via_permuted = predict_exact(&permuted, &query, 5, Metric::Euclidean, false).unwrap();
        assert_eq!(direct, via_permuted);
    }

    #[test]
    fn vote_tie_breaks_by_summed_distance_then_label() {
        let labels = [0u32, 0, 1, 1];
        // 2 vs 2; label 1 has the smaller distance sum
        let candidates = [(0, 1.0), (1, 4.0), (2, 1.5), (3, 2.0)];
        assert_eq!(vote(&candidates, &labels, false), 1);
        // fully symmetric: lexicographically smaller label id wins
        let even = [(0, 1.0), (1, 2.0), (2, 1.0), (3, 2.0)];
        assert_eq!(vote(&even, &labels, false), 0);
    }

    #[test]
    fn weighted_vote_favors_close_neighbors() {
        let labels = [0u32, 1, 1];
        // one very close 0 vs two distant 1s: weighting flips the outcome
        let candidates = [(0, 0.1), (1, 5.0), (2, 5.0)];
        assert_eq!(vote(&candidates, &labels, false), 1);
        assert_eq!(vote(&candidates, &labels, true), 0);
    }

    #[test]
    fn graph_prediction_recovers_a_training_point() {
        let train = make_gaussian_clusters(2, 100, 4, 10.0, 7).unwrap();
        let g = build_knn_graph(&train, 10, Metric::Euclidean).unwrap();
        let cfg = config(1, 50, 1, 10);
        let mut hits = 0;
        let trials = 100;
        for trial in 0..trials {
            let outcome =
                predict_outcome(&g, &train, train.row(trial), &cfg, trial as u64).unwrap();
            if outcome.label == train.label(trial).unwrap() {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{hits}/{trials}");
    }

    #[test]
    fn graph_prediction_separates_well_spaced_clusters() {
        let train = make_gaussian_clusters(2, 100, 3, 10.0, 11).unwrap();
        let test = make_gaussian_clusters(2, 25, 3, 10.0, 12).unwrap();
        let g = build_knn_graph(&train, 10, Metric::Euclidean).unwrap();
        let cfg = config(5, 20, 1, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let report = evaluate(&g, &train, &test, &cfg, &mut rng).unwrap();
        assert!(report.accuracy >= 0.99, "accuracy {}", report.accuracy);
    }

    #[test]
    fn approximate_agrees_with_exact_on_most_queries() {
        let train = make_gaussian_clusters(2, 100, 3, 6.0, 21).unwrap();
        let test = make_gaussian_clusters(2, 30, 3, 6.0, 22).unwrap();
        let g = build_knn_graph(&train, 10, Metric::Euclidean).unwrap();
        let cfg = config(5, 30, 1, 10);
        let mut agree = 0;
        for q in 0..test.len() {
            let approx = predict_outcome(&g, &train, test.row(q), &cfg, q as u64)
                .unwrap()
                .label;
            let exact = predict_exact(&train, test.row(q), 5, Metric::Euclidean, false).unwrap();
            if approx == exact {
                agree += 1;
            }
        }
        let rate = agree as f64 / test.len() as f64;
        assert!(rate >= 0.95, "agreement {rate}");
    }

    #[test]
    fn exact_self_evaluation_memorizes() {
        let train = make_gaussian_clusters(3, 20, 3, 8.0, 31).unwrap();
        let report = evaluate_exact(&train, &train, 1, Metric::Euclidean, false, 0).unwrap();
        assert_eq!(report.accuracy, 1.0);
        assert_eq!(
            report.total_evals,
            (train.len() * train.len()) as u64,
            "exact classifier scans the whole training set per query"
        );
    }

    #[test]
    fn report_accuracy_matches_stored_predictions() {
        let train = make_gaussian_clusters(2, 40, 3, 5.0, 41).unwrap();
        let test = make_gaussian_clusters(2, 15, 3, 5.0, 42).unwrap();
        let report = evaluate_exact(&train, &test, 3, Metric::Euclidean, false, 9).unwrap();
        let labels = test.labels().unwrap();
        let recomputed = report
            .predictions
            .iter()
            .zip(labels)
            .filter(|(p, l)| p == l)
            .count() as f64
            / labels.len() as f64;
        assert_eq!(report.accuracy, recomputed);
    }

    #[test]
    fn evaluate_rejects_empty_or_unlabeled_input() {
        let train = make_gaussian_clusters(2, 10, 2, 5.0, 1).unwrap();
        let unlabeled = Dataset::new(vec![0.0, 1.0], 2, None, Vec::new()).unwrap();
        assert!(matches!(
            evaluate_exact(&unlabeled, &train, 1, Metric::Euclidean, false, 0),
            Err(ClassifierError::MissingLabels)
        ));
        assert!(matches!(
            predict_exact(&unlabeled, &[0.0, 0.0], 1, Metric::Euclidean, false),
            Err(ClassifierError::MissingLabels)
        ));
    }
}
