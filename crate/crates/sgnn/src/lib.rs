//! Smoothed graph-based nearest neighbor search (SGNN).
//!
//! This crate optimizes functions defined on the nodes of a directed graph by
//! a continuation scheme: the objective is smoothed by random walks of
//! decreasing length (or, exactly, by a min-based smoothing operator), and each
//! stage is minimized by hill climbing or simulated annealing warm-started at
//! the previous stage's solution. Applied to a k-nearest-neighbor proximity
//! graph over a vector dataset, this yields an approximate nearest neighbor
//! search whose per-query cost does not grow with the dataset size, plus a
//! majority-vote classifier built on top of it.
//!
//! # Layout
//!
//! * [`graph`] — directed proximity graphs: brute-force k-NN construction,
//!   lazy random walks, BFS diameter, and a line-oriented persistence format.
//! * [`field`] — scalar fields (one value per node) and their CSV form.
//! * [`smoothing`] — the exact min-smoothing operator, its softmin relaxation
//!   and directional derivative, exact random-walk diffusion, and the
//!   single-sample Monte Carlo estimator of a smoothed value.
//! * [`objective`] — the node-to-value evaluation contract with memoization
//!   and an evaluation counter (the portable cost measure).
//! * [`optimizer`] — hill climbing, the continuation loop, smoothed simulated
//!   annealing with random restarts, and the exhaustive-search baseline.
//! * [`classifier`] — K-NN prediction and evaluation (approximate and exact).
//! * [`data`] — dataset ingestion (IDX, CSV), synthetic cluster generation,
//!   and deterministic splitting.

pub mod classifier;
pub mod data;
pub mod field;
pub mod graph;
pub mod objective;
pub mod optimizer;
pub mod seeds;
pub mod smoothing;

pub use classifier::{ClassifierConfig, EvalReport};
pub use data::Dataset;
pub use field::ScalarField;
pub use graph::{Metric, ProximityGraph};
pub use objective::{FieldObjective, Objective, QueryObjective};
pub use optimizer::{AnnealParams, SearchResult};
