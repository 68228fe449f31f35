//! Search procedures over a graph-valued objective.
//!
//! All of them see the objective only through sampled smoothed values: a
//! length-`s` lazy random walk from a node followed by one objective
//! evaluation at the endpoint. With `s = 0` the sample is the exact value and
//! hill climbing degenerates to deterministic greedy descent.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::ProximityGraph;
use crate::objective::Objective;
use crate::seeds;
use crate::smoothing::mc_smoothed_value;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("restart count must be at least 1")]
    ZeroRestarts,
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("result count must be at least 1")]
    ZeroResults,
    #[error("objective is defined over no nodes")]
    EmptyObjective,
    #[error("objective covers {objective} nodes but graph has {graph}")]
    LengthMismatch { objective: usize, graph: usize },
}

/// Knobs of an annealing search with random restarts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AnnealParams {
    /// Number of independent restarts (I).
    pub restarts: usize,
    /// Annealing steps per restart (J).
    pub steps: usize,
    /// Length of the smoothing random walks (T); 0 means plain annealing.
    pub walk_length: usize,
    /// How many best candidates to return (K).
    pub k: usize,
    /// Master seed; restart i uses a stream derived from it.
    pub seed: u64,
    /// Keep the incumbent's sampled value until it moves instead of
    /// resampling every step. Off by default: each step draws a fresh
    /// sample for the incumbent.
    #[serde(default)]
    pub reuse_incumbent: bool,
}

impl AnnealParams {
    pub fn new(restarts: usize, steps: usize, walk_length: usize, k: usize, seed: u64) -> Self {
        Self {
            restarts,
            steps,
            walk_length,
            k,
            seed,
            reuse_incumbent: false,
        }
    }

    pub fn validate(&self) -> Result<(), OptimError> {
        if self.restarts == 0 {
            return Err(OptimError::ZeroRestarts);
        }
        if self.steps == 0 {
            return Err(OptimError::ZeroSteps);
        }
        if self.k == 0 {
            return Err(OptimError::ZeroResults);
        }
        Ok(())
    }

    /// Default step count for an n-point training set: ⌈ln n⌉, at least 1.
    pub fn auto_steps(n: usize) -> usize {
        ((n.max(1) as f64).ln().ceil() as usize).max(1)
    }
}

/// Ranked search outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    /// `(node, objective value)` pairs, deduplicated, ascending by value
    /// (ties by node index), at most K entries.
    pub candidates: Vec<(usize, f64)>,
    /// Objective evaluations spent (cache misses only).
    pub evaluations: u64,
    /// Wall-clock seconds.
    pub wall_time: f64,
    /// True when fewer than K distinct nodes were available.
    pub short: bool,
}

impl SearchResult {
    pub fn best(&self) -> Option<(usize, f64)> {
        self.candidates.first().copied()
    }
}

fn rank_candidates(mut entries: Vec<(usize, f64)>, k: usize) -> (Vec<(usize, f64)>, bool) {
    entries.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let short = entries.len() < k;
    entries.truncate(k);
    (entries, short)
}

/// Hill climbing on sampled smoothed values (walk length `s`).
///
/// Each iteration samples the incumbent and every out-neighbor once and moves
/// to the argmin; it stops when the incumbent wins its own sampled
/// comparison. Because samples are stochastic the loop guard alone need not
/// terminate, so a hard cap of `node_count` iterations is applied. With
/// `s = 0` this is exact greedy descent (ties to the smaller index).
pub fn hill_climb(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    start: usize,
    s: usize,
    rng: &mut impl Rng,
) -> usize {
    let mut x = start;
    for _ in 0..g.node_count() {
        let incumbent = mc_smoothed_value(g, objective, x, s, rng);
        let mut best = x;
        let mut best_val = incumbent;
        for &nb in g.out_neighbors(x) {
            let v = mc_smoothed_value(g, objective, nb, s, rng);
            if v < best_val || (v == best_val && best != x && nb < best) {
                best = nb;
                best_val = v;
            }
        }
        if best == x {
            break;
        }
        x = best;
    }
    x
}

/// The continuation loop: hill-climb the most-smoothed objective from a
/// random start, then re-climb with progressively shorter walks, warm-started
/// each round, finishing with an exact (`s = 0`) descent so the result is a
/// true local minimum of the unsmoothed objective.
pub fn continuation(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    rounds: usize,
    rng: &mut impl Rng,
) -> usize {
    let mut x = rng.gen_range(0..g.node_count());
    for s in (1..=rounds).rev() {
        x = hill_climb(g, objective, x, s, rng);
    }
    hill_climb(g, objective, x, 0, rng)
}

/// Core annealing loop. `temperature(j, steps)` supplies the schedule;
/// `on_accept` observes every accepted state.
#[allow(clippy::too_many_arguments)]
fn anneal_impl(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    start: usize,
    walk_length: usize,
    steps: usize,
    reuse_incumbent: bool,
    temperature: impl Fn(usize, usize) -> f64,
    rng: &mut impl Rng,
    mut on_accept: impl FnMut(usize),
) -> usize {
    let mut x = start;
    let mut incumbent_sample: Option<f64> = None;
    for j in 1..=steps {
        let neighbors = g.out_neighbors(x);
        if neighbors.is_empty() {
            continue; // nowhere to move this step
        }
        let sampled_x = match incumbent_sample {
            Some(v) if reuse_incumbent => v,
            _ => mc_smoothed_value(g, objective, x, walk_length, rng),
        };
        incumbent_sample = Some(sampled_x);
        let u = neighbors[rng.gen_range(0..neighbors.len())];
        let sampled_u = mc_smoothed_value(g, objective, u, walk_length, rng);
        let accept = if sampled_u <= sampled_x {
            true
        } else {
            let tau = temperature(j, steps);
            if tau <= 0.0 {
                false
            } else {
                rng.gen::<f64>() < ((sampled_x - sampled_u) / tau).exp()
            }
        };
        if accept {
            x = u;
            incumbent_sample = None;
            on_accept(x);
        }
    }
    x
}

fn linear_temperature(j: usize, steps: usize) -> f64 {
    1.0 - j as f64 / steps as f64
}

/// Simulated annealing on sampled smoothed values with the linear temperature
/// schedule τ_j = 1 − j/J.
///
/// Per step: sample the incumbent, sample one uniformly random out-neighbor,
/// accept non-worsening moves outright and worsening moves with probability
/// `e^(Δ/τ)`. At τ = 0 (the final step) worsening moves are rejected. A node
/// with no out-neighbors makes the step a no-op.
pub fn smoothed_simulated_annealing(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    start: usize,
    walk_length: usize,
    steps: usize,
    rng: &mut impl Rng,
) -> usize {
    anneal_impl(
        g,
        objective,
        start,
        walk_length,
        steps,
        false,
        linear_temperature,
        rng,
        |_| {},
    )
}

/// Annealing search with random restarts.
///
/// Runs `params.restarts` independent annealing passes from uniformly random
/// starts (restart `i` seeds its own RNG stream from `params.seed`), pools
/// every accepted state plus each restart's final state, scores the pool at
/// true (walk-length 0) objective values, and returns the best `params.k`
/// distinct nodes.
pub fn sgnn_search(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    params: &AnnealParams,
) -> Result<SearchResult, OptimError> {
    params.validate()?;
    if objective.len() != g.node_count() {
        return Err(OptimError::LengthMismatch {
            objective: objective.len(),
            graph: g.node_count(),
        });
    }
    if g.node_count() == 0 {
        return Err(OptimError::EmptyObjective);
    }
    let started = Instant::now();
    let evals_before = objective.evaluations();
    let mut pool: Vec<usize> = Vec::new();
    for restart in 0..params.restarts {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seeds::derive(params.seed, restart as u64));
        let start = rng.gen_range(0..g.node_count());
        let final_state = anneal_impl(
            g,
            objective,
            start,
            params.walk_length,
            params.steps,
            params.reuse_incumbent,
            linear_temperature,
            &mut rng,
            |accepted| pool.push(accepted),
        );
        pool.push(final_state);
    }
    pool.sort_unstable();
    pool.dedup();
    let entries: Vec<(usize, f64)> = pool
        .into_iter()
        .map(|node| (node, objective.value(node)))
        .collect();
    let (candidates, short) = rank_candidates(entries, params.k);
    Ok(SearchResult {
        candidates,
        evaluations: objective.evaluations() - evals_before,
        wall_time: started.elapsed().as_secs_f64(),
        short,
    })
}

/// Evaluates every node and returns the exact bottom-K: the O(n) baseline
/// that every approximate search is measured against.
pub fn exhaustive_search(objective: &mut impl Objective, k: usize) -> Result<SearchResult, OptimError> {
    if k == 0 {
        return Err(OptimError::ZeroResults);
    }
    let n = objective.len();
    if n == 0 {
        return Err(OptimError::EmptyObjective);
    }
    let started = Instant::now();
    let evals_before = objective.evaluations();
    let entries: Vec<(usize, f64)> = (0..n).map(|i| (i, objective.value(i))).collect();
    let (candidates, short) = rank_candidates(entries, k);
    Ok(SearchResult {
        candidates,
        evaluations: objective.evaluations() - evals_before,
        wall_time: started.elapsed().as_secs_f64(),
        short,
    })
}
