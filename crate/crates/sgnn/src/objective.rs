//! Node-to-value evaluation with memoization and an evaluation counter.
//!
//! The counter is the portable cost measure: it counts evaluations that
//! actually computed the underlying function (cache hits are free), which for
//! nearest-neighbor search means distance computations.

use thiserror::Error;

use crate::data::Dataset;
use crate::field::ScalarField;
use crate::graph::Metric;

#[derive(Debug, Error)]
pub enum ObjectiveError {
    #[error("query has dimension {query}, dataset has dimension {dataset}")]
    DimensionMismatch { query: usize, dataset: usize },
}

pub trait Objective {
    /// Number of nodes the objective is defined over.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at `node`. Repeated calls return the same value.
    fn value(&mut self, node: usize) -> f64;

    /// Evaluations that computed the underlying function so far.
    fn evaluations(&self) -> u64;
}

/// Distance from a fixed query vector to each dataset row, memoized per node.
pub struct QueryObjective<'a> {
    dataset: &'a Dataset,
    query: &'a [f64],
    metric: Metric,
    cache: Vec<f64>, // NAN = not yet evaluated; distances are never NaN
    evaluations: u64,
}

impl<'a> QueryObjective<'a> {
    pub fn new(
        dataset: &'a Dataset,
        query: &'a [f64],
        metric: Metric,
    ) -> Result<Self, ObjectiveError> {
        if query.len() != dataset.dim() {
            return Err(ObjectiveError::DimensionMismatch {
                query: query.len(),
                dataset: dataset.dim(),
            });
        }
        Ok(Self {
            dataset,
            query,
            metric,
            cache: vec![f64::NAN; dataset.len()],
            evaluations: 0,
        })
    }
}

impl Objective for QueryObjective<'_> {
    fn len(&self) -> usize {
        self.dataset.len()
    }

    fn value(&mut self, node: usize) -> f64 {
        let cached = self.cache[node];
        if !cached.is_nan() {
            return cached;
        }
        let d = self.metric.distance(self.dataset.row(node), self.query);
        self.cache[node] = d;
        self.evaluations += 1;
        d
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

/// A stored field treated as an objective (tests, demos). The counter follows
/// the same first-touch convention as a memoized objective.
pub struct FieldObjective {
    field: ScalarField,
    touched: Vec<bool>,
    evaluations: u64,
}

impl FieldObjective {
    pub fn new(field: ScalarField) -> Self {
        let n = field.len();
        Self {
            field,
            touched: vec![false; n],
            evaluations: 0,
        }
    }
}

impl Objective for FieldObjective {
    fn len(&self) -> usize {
        self.field.len()
    }

    fn value(&mut self, node: usize) -> f64 {
        if !self.touched[node] {
            self.touched[node] = true;
            self.evaluations += 1;
        }
        self.field[node]
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}
