//! Directed proximity graphs over vector datasets.
//!
//! A proximity graph connects each dataset row to its `N` nearest rows under a
//! metric. Search-time traversal follows out-edges only; the lazy random walk
//! used for smoothing moves from `i` to a state drawn uniformly from
//! `{i} ∪ N_i`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

/// First token of the persistence header.
pub const GRAPH_MAGIC: &str = "SGNN-GRAPH";
/// Format version written and accepted by this crate.
pub const GRAPH_VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("need at least 2 points to build a neighbor graph, got {0}")]
    NotEnoughNodes(usize),
    #[error("neighbor count must be at least 1")]
    ZeroNeighbors,
    #[error("node {node} out of range for graph of {len} nodes")]
    NodeOutOfRange { node: usize, len: usize },
    #[error("node {node} lists itself as a neighbor")]
    SelfLoop { node: usize },
    #[error("node {node} lists neighbor {neighbor} more than once")]
    DuplicateNeighbor { node: usize, neighbor: usize },
    #[error("graph is not strongly connected")]
    Disconnected,
    #[error("graph file is empty")]
    EmptyFile,
    #[error("graph file is not valid UTF-8")]
    NotText,
    #[error("bad graph header {0:?}")]
    BadHeader(String),
    #[error("unsupported graph format version {0:?}")]
    VersionMismatch(String),
    #[error("adjacency line {line}: cannot parse {token:?} as a node index")]
    BadIndex { line: usize, token: String },
    #[error("header declares {expected} nodes but file has {found} adjacency lines")]
    RowCountMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Distance used to rank neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
}

impl Metric {
    /// Squared form, cheaper and order-equivalent; use for comparisons.
    pub fn squared_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| {
                    let d = x - y;
                    d * d
                })
                .sum(),
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.squared_distance(a, b).sqrt()
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Euclidean => write!(f, "euclidean"),
        }
    }
}

/// Immutable directed graph over dataset indices, stored as per-node ordered
/// out-neighbor lists. No self-loops, no duplicate edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProximityGraph {
    out: Vec<Vec<usize>>,
}

impl ProximityGraph {
    /// Validates and wraps raw adjacency lists.
    pub fn from_adjacency(out: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = out.len();
        let mut seen = vec![usize::MAX; n];
        for (node, neighbors) in out.iter().enumerate() {
            for &nb in neighbors {
                if nb >= n {
                    return Err(GraphError::NodeOutOfRange { node: nb, len: n });
                }
                if nb == node {
                    return Err(GraphError::SelfLoop { node });
                }
                if seen[nb] == node {
                    return Err(GraphError::DuplicateNeighbor { node, neighbor: nb });
                }
                seen[nb] = node;
            }
        }
        Ok(Self { out })
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    /// Out-neighbors of `i`, in stored order. Panics if `i` is out of range;
    /// use [`ProximityGraph::ensure_node`] first for untrusted indices.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.out[i].len()
    }

    /// Range check for indices coming from files or the command line.
    pub fn ensure_node(&self, i: usize) -> Result<(), GraphError> {
        if i < self.out.len() {
            Ok(())
        } else {
            Err(GraphError::NodeOutOfRange {
                node: i,
                len: self.out.len(),
            })
        }
    }

    /// One lazy random-walk step: uniform over `{i} ∪ N_i`, so each of the
    /// `m_i + 1` outcomes has probability `1/(m_i+1)`.
    pub fn walk_step(&self, i: usize, rng: &mut impl Rng) -> usize {
        let neighbors = &self.out[i];
        let pick = rng.gen_range(0..=neighbors.len());
        if pick == neighbors.len() {
            i
        } else {
            neighbors[pick]
        }
    }

    /// Composition of `t` lazy steps; `t = 0` returns `i`.
    pub fn random_walk(&self, i: usize, t: usize, rng: &mut impl Rng) -> usize {
        let mut state = i;
        for _ in 0..t {
            state = self.walk_step(state, rng);
        }
        state
    }

    /// Directed BFS distances from `start`; `usize::MAX` marks unreachable.
    pub fn bfs_distances(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.out.len()];
        let mut queue = VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &self.out[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Longest shortest directed path over all ordered pairs.
    ///
    /// Errors when some pair is unreachable (the graph is not strongly
    /// connected) instead of reporting an infinite diameter.
    pub fn bfs_diameter(&self) -> Result<usize, GraphError> {
        if self.out.is_empty() {
            return Err(GraphError::EmptyDataset);
        }
        let mut diameter = 0;
        for start in 0..self.out.len() {
            let dist = self.bfs_distances(start);
            for &d in &dist {
                if d == usize::MAX {
                    return Err(GraphError::Disconnected);
                }
                diameter = diameter.max(d);
            }
        }
        Ok(diameter)
    }

    /// Serializes to the line-oriented `SGNN-GRAPH v1` format.
    pub fn to_string_format(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {}", GRAPH_MAGIC, GRAPH_VERSION, self.out.len()).unwrap();
        for neighbors in &self.out {
            let mut first = true;
            for nb in neighbors {
                if !first {
                    s.push(' ');
                }
                write!(s, "{nb}").unwrap();
                first = false;
            }
            s.push('\n');
        }
        s
    }

    /// Parses the `SGNN-GRAPH v1` format: a header line
    /// `SGNN-GRAPH v1 <n>` followed by exactly `n` lines of space-separated
    /// out-neighbor indices (a line may be empty). All structural invariants
    /// are re-validated.
    pub fn parse(bytes: &[u8]) -> Result<Self, GraphError> {
        let text = std::str::from_utf8(bytes).map_err(|_| GraphError::NotText)?;
        if text.is_empty() {
            return Err(GraphError::EmptyFile);
        }
        let mut lines: Vec<&str> = text.split('\n').collect();
        if lines.last() == Some(&"") {
            lines.pop(); // trailing newline
        }
        let header = lines.first().ok_or(GraphError::EmptyFile)?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let [magic, version, count] = tokens[..] else {
            return Err(GraphError::BadHeader(header.to_string()));
        };
        if magic != GRAPH_MAGIC {
            return Err(GraphError::BadHeader(header.to_string()));
        }
        if version != GRAPH_VERSION {
            return Err(GraphError::VersionMismatch(version.to_string()));
        }
        let n: usize = count
            .parse()
            .map_err(|_| GraphError::BadHeader(header.to_string()))?;
        if lines.len() - 1 != n {
            return Err(GraphError::RowCountMismatch {
                expected: n,
                found: lines.len() - 1,
            });
        }
        let mut out = Vec::with_capacity(n);
        for (idx, line) in lines[1..].iter().enumerate() {
            let mut neighbors = Vec::new();
            for token in line.split_whitespace() {
                let nb: usize = token.parse().map_err(|_| GraphError::BadIndex {
                    line: idx + 2,
                    token: token.to_string(),
                })?;
                neighbors.push(nb);
            }
            out.push(neighbors);
        }
        Self::from_adjacency(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        fs::write(path, self.to_string_format())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse(&fs::read(path)?)
    }
}

/// Connects each row of `dataset` to its `min(n_neighbors, n-1)` nearest
/// other rows, ranked by `(distance, index)` so ties go to the smaller index.
///
/// Construction is exhaustive (O(n²·d) distance work, parallel over rows);
/// this is the offline training-phase cost.
pub fn build_knn_graph(
    dataset: &Dataset,
    n_neighbors: usize,
    metric: Metric,
) -> Result<ProximityGraph, GraphError> {
    if n_neighbors == 0 {
        return Err(GraphError::ZeroNeighbors);
    }
    let n = dataset.len();
    if n == 0 {
        return Err(GraphError::EmptyDataset);
    }
    if n < 2 {
        return Err(GraphError::NotEnoughNodes(n));
    }
    let keep = n_neighbors.min(n - 1);
    let out: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = dataset.row(i);
            let mut candidates: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (metric.squared_distance(xi, dataset.row(j)), j))
                .collect();
            let rank = |a: &(f64, usize), b: &(f64, usize)| {
                a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
            };
            if keep < candidates.len() {
                candidates.select_nth_unstable_by(keep - 1, rank);
                candidates.truncate(keep);
            }
            candidates.sort_unstable_by(rank);
            candidates.into_iter().map(|(_, j)| j).collect()
        })
        .collect();
    Ok(ProximityGraph { out })
}
