//! Smoothing operators on scalar fields over a directed graph.
//!
//! The exact operator replaces each node's value with the minimum of its own
//! value and its cheapest out-neighbor plus an increment `c`. Iterating it
//! makes any field hill-climbing friendly within diameter-many rounds while
//! preserving the minimum value and, for `c > 0`, the exact argmin set. Its
//! softmin relaxation is differentiable; the directional derivative of the
//! relaxation at the origin collapses, as `c → 0`, to one step of the lazy
//! random-walk diffusion `P = (D+I)⁻¹(A+I)` — which is why sampling the
//! objective after a short random walk acts as an affine surrogate for the
//! exact smoothing.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::ScalarField;
use crate::graph::ProximityGraph;
use crate::objective::Objective;

#[derive(Debug, Error)]
pub enum SmoothingError {
    #[error("field has {field} values but graph has {graph} nodes")]
    LengthMismatch { field: usize, graph: usize },
    #[error("smoothing increment must be non-negative, got {0}")]
    NegativeIncrement(f64),
    #[error("softmin sharpness must be positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("softmin overflowed to a non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("graph has no nodes")]
    EmptyGraph,
}

/// Parameters of one smoothing pass.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmoothingParams {
    /// Increment added to neighbor values (keeps minimizers unique for c > 0).
    pub c: f64,
    /// Softmin sharpness; the relaxation approaches the exact min as λ → ∞.
    pub lambda: f64,
    /// Number of smoothing rounds.
    pub t: usize,
}

impl SmoothingParams {
    pub fn new(c: f64, lambda: f64, t: usize) -> Result<Self, SmoothingError> {
        if c.is_nan() || c < 0.0 {
            return Err(SmoothingError::NegativeIncrement(c));
        }
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(SmoothingError::NonPositiveLambda(lambda));
        }
        Ok(Self { c, lambda, t })
    }

    /// Default increment for a field: small relative to its value range, so
    /// smoothed values stay close to the originals. Any c > 0 preserves the
    /// argmin set; the scale only controls how visible the increment is.
    pub fn default_increment(field: &ScalarField) -> f64 {
        let max = field.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - field.min_value();
        if range > 0.0 {
            1e-6 * range
        } else {
            1e-6
        }
    }
}

fn check_lengths(g: &ProximityGraph, f: &ScalarField) -> Result<(), SmoothingError> {
    if f.len() != g.node_count() {
        return Err(SmoothingError::LengthMismatch {
            field: f.len(),
            graph: g.node_count(),
        });
    }
    Ok(())
}

fn check_increment(c: f64) -> Result<(), SmoothingError> {
    if c.is_nan() || c < 0.0 {
        return Err(SmoothingError::NegativeIncrement(c));
    }
    Ok(())
}

/// One exact smoothing round:
/// `out[i] = min(f[i], min_{u ∈ N_i} f[u] + c)`.
///
/// Nodes without out-neighbors keep their value (the min over an empty
/// neighborhood is vacuous).
pub fn exact_smooth_step(
    g: &ProximityGraph,
    f: &ScalarField,
    c: f64,
) -> Result<ScalarField, SmoothingError> {
    check_lengths(g, f)?;
    check_increment(c)?;
    let values = f.values();
    let out = (0..values.len())
        .map(|i| {
            let mut best = values[i];
            for &u in g.out_neighbors(i) {
                let candidate = values[u] + c;
                if candidate < best {
                    best = candidate;
                }
            }
            best
        })
        .collect();
    Ok(ScalarField::from_raw(out))
}

/// `t`-fold composition of [`exact_smooth_step`]; `t = 0` is the identity.
pub fn exact_smooth(
    g: &ProximityGraph,
    f: &ScalarField,
    c: f64,
    t: usize,
) -> Result<ScalarField, SmoothingError> {
    check_lengths(g, f)?;
    check_increment(c)?;
    let mut current = f.clone();
    for _ in 0..t {
        current = exact_smooth_step(g, &current, c)?;
    }
    Ok(current)
}

/// Greedy descent from `start`: repeatedly move to the strictly
/// smallest-valued out-neighbor (ties to the smaller index) until no
/// out-neighbor improves on the current value.
pub fn greedy_descent(g: &ProximityGraph, f: &ScalarField, start: usize) -> usize {
    let values = f.values();
    let mut x = start;
    loop {
        let mut best = x;
        let mut best_val = values[x];
        for &nb in g.out_neighbors(x) {
            let v = values[nb];
            if v < best_val || (v == best_val && best != x && nb < best) {
                best = nb;
                best_val = v;
            }
        }
        if best == x {
            return x;
        }
        x = best;
    }
}

/// Whether greedy descent from every start node reaches a node attaining the
/// global minimum of `f` (the field is hill-climbing friendly).
pub fn is_hcf(g: &ProximityGraph, f: &ScalarField) -> Result<bool, SmoothingError> {
    if g.node_count() == 0 {
        return Err(SmoothingError::EmptyGraph);
    }
    check_lengths(g, f)?;
    let min = f.min_value();
    Ok((0..g.node_count()).all(|start| f[greedy_descent(g, f, start)] == min))
}

/// Softmin relaxation of one smoothing round.
///
/// Over the candidate values `{f(i)} ∪ {f(u)+c : u ∈ N_i}`, returns the
/// exponentially weighted mean with weights `e^(−λ·v)`. The maximum weight is
/// factored out before exponentiation so large λ cannot overflow; the output
/// is still checked for finiteness.
pub fn softmin_smooth_step(
    g: &ProximityGraph,
    f: &ScalarField,
    c: f64,
    lambda: f64,
) -> Result<ScalarField, SmoothingError> {
    check_lengths(g, f)?;
    check_increment(c)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(SmoothingError::NonPositiveLambda(lambda));
    }
    let values = f.values();
    let mut out = Vec::with_capacity(values.len());
    let mut candidates = Vec::new();
    for i in 0..values.len() {
        candidates.clear();
        candidates.push(values[i]);
        candidates.extend(g.out_neighbors(i).iter().map(|&u| values[u] + c));
        let min = candidates.iter().copied().fold(f64::INFINITY, f64::min);
        let mut weight_sum = 0.0;
        let mut weighted_value = 0.0;
        for &v in &candidates {
            let w = (-lambda * (v - min)).exp();
            weight_sum += w;
            weighted_value += v * w;
        }
        let smoothed = weighted_value / weight_sum;
        if !smoothed.is_finite() {
            return Err(SmoothingError::NonFinite { node: i });
        }
        out.push(smoothed);
    }
    Ok(ScalarField::from_raw(out))
}

/// Directional derivative at the zero field of the softmin-relaxed operator,
/// in direction `phi`, evaluated at node `i`:
///
/// ```text
/// d/dε softmin{ε·φ}(i) |_{ε=0}
///   = [ (φ(i) + Σ_j φ(u_j)·q·(1−λc)) · (1 + m·q)
///       + m·c·λ·q · (φ(i) + Σ_j φ(u_j)·q) ] / (1 + m·q)²,   q = e^(−λc)
/// ```
///
/// As `c → 0` this tends to `(φ(i) + Σ_j φ(u_j)) / (1 + m)`, the node-`i`
/// entry of one lazy-diffusion step applied to `φ`.
pub fn softmin_directional_derivative(
    g: &ProximityGraph,
    phi: &ScalarField,
    c: f64,
    lambda: f64,
    i: usize,
) -> Result<f64, SmoothingError> {
    check_lengths(g, phi)?;
    check_increment(c)?;
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(SmoothingError::NonPositiveLambda(lambda));
    }
    let m = g.degree(i) as f64;
    let q = (-lambda * c).exp();
    let phi_i = phi[i];
    let neighbor_sum: f64 = g.out_neighbors(i).iter().map(|&u| phi[u]).sum();
    let denom = 1.0 + m * q;
    let numerator = (phi_i + neighbor_sum * q * (1.0 - lambda * c)) * denom
        + m * c * lambda * q * (phi_i + neighbor_sum * q);
    Ok(numerator / (denom * denom))
}

/// `t` steps of the exact lazy diffusion `P^t f` with
/// `P = (D+I)⁻¹(A+I)`: one step maps `f(i)` to
/// `(f(i) + Σ_{u ∈ N_i} f(u)) / (1 + m_i)`.
pub fn exact_diffusion(
    g: &ProximityGraph,
    f: &ScalarField,
    t: usize,
) -> Result<ScalarField, SmoothingError> {
    check_lengths(g, f)?;
    let mut current: Vec<f64> = f.values().to_vec();
    for _ in 0..t {
        let next = (0..current.len())
            .map(|i| {
                let sum: f64 = g.out_neighbors(i).iter().map(|&u| current[u]).sum();
                (current[i] + sum) / (g.degree(i) as f64 + 1.0)
            })
            .collect();
        current = next;
    }
    Ok(ScalarField::from_raw(current))
}

/// Single-sample Monte Carlo estimate of the diffused value `(P^t f)(i)`:
/// walk `t` lazy steps from `i` and evaluate the objective at the endpoint.
/// Makes exactly one objective evaluation.
pub fn mc_smoothed_value(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    i: usize,
    t: usize,
    rng: &mut impl Rng,
) -> f64 {
    let stop = g.random_walk(i, t, rng);
    objective.value(stop)
}

/// Mean of `samples` independent estimates (variance-reduction variant; the
/// search algorithms use the single-sample default).
pub fn mc_smoothed_mean(
    g: &ProximityGraph,
    objective: &mut impl Objective,
    i: usize,
    t: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> f64 {
    assert!(samples >= 1, "need at least one sample");
    let mut sum = 0.0;
    for _ in 0..samples {
        sum += mc_smoothed_value(g, objective, i, t, rng);
    }
    sum / samples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FieldObjective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_graph(n: usize) -> ProximityGraph {
        let out = (0..n)
            .map(|i| {
                let mut nb = Vec::new();
                if i > 0 {
                    nb.push(i - 1);
                }
                if i + 1 < n {
                    nb.push(i + 1);
                }
                nb
            })
            .collect();
        ProximityGraph::from_adjacency(out).unwrap()
    }

    fn field(values: &[f64]) -> ScalarField {
        ScalarField::new(values.to_vec()).unwrap()
    }

    #[test]
    fn constant_field_is_a_fixed_point() {
        let g = path_graph(5);
        let f = ScalarField::constant(5, 2.5);
        for c in [0.0, 0.1, 3.0] {
            assert_eq!(exact_smooth_step(&g, &f, c).unwrap(), f);
        }
    }

    #[test]
    fn one_step_on_the_three_path() {
        let g = path_graph(3);
        let f = field(&[0.0, 5.0, 1.0]);
        assert_eq!(
            exact_smooth_step(&g, &f, 0.5).unwrap().values(),
            [0.0, 0.5, 1.0]
        );
        assert_eq!(
            exact_smooth_step(&g, &f, 0.0).unwrap().values(),
            [0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn step_rejects_mismatched_lengths_and_negative_c() {
        let g = path_graph(3);
        let f = field(&[0.0, 1.0]);
        assert!(matches!(
            exact_smooth_step(&g, &f, 0.1),
            Err(SmoothingError::LengthMismatch { field: 2, graph: 3 })
        ));
        let f3 = field(&[0.0, 1.0, 2.0]);
        assert!(matches!(
            exact_smooth_step(&g, &f3, -0.1),
            Err(SmoothingError::NegativeIncrement(_))
        ));
    }

    #[test]
    fn smooth_zero_rounds_is_identity() {
        let g = path_graph(4);
        let f = field(&[3.0, 1.0, 4.0, 1.5]);
        assert_eq!(exact_smooth(&g, &f, 0.7, 0).unwrap(), f);
    }

    #[test]
    fn smoothing_spreads_the_minimum_along_the_path() {
        // closed form: f(i,t) = min over v within t hops of f(v) + c·dist
        let g = path_graph(5);
        let f = field(&[0.0, 9.0, 9.0, 9.0, 9.0]);
        let smoothed = exact_smooth(&g, &f, 1.0, 4).unwrap();
        assert_eq!(smoothed.values(), [0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn smoothing_reaches_a_fixed_point_by_the_diameter() {
        let g = path_graph(6);
        let f = field(&[4.0, 0.5, 7.0, 2.0, 6.0, 1.0]);
        let d = g.bfs_diameter().unwrap();
        for c in [1e-6, 0.01, 1.0] {
            let at_d = exact_smooth(&g, &f, c, d).unwrap();
            let one_more = exact_smooth_step(&g, &at_d, c).unwrap();
            assert_eq!(at_d, one_more, "c = {c}");
        }
    }

    #[test]
    fn hcf_on_monotone_and_two_basin_fields() {
        let g4 = path_graph(4);
        assert!(is_hcf(&g4, &field(&[0.0, 1.0, 2.0, 3.0])).unwrap());

        // starting at node 4, f[3] = 2.5 > f[4] = 1: stuck above the global min
        let g5 = path_graph(5);
        assert!(!is_hcf(&g5, &field(&[0.0, 2.0, 3.0, 2.5, 1.0])).unwrap());
    }

    #[test]
    fn smoothing_to_the_diameter_makes_fields_hcf() {
        let g = path_graph(5);
        let f = field(&[0.0, 2.0, 3.0, 2.5, 1.0]);
        let d = g.bfs_diameter().unwrap();
        let smoothed = exact_smooth(&g, &f, 0.01, d).unwrap();
        assert!(is_hcf(&g, &smoothed).unwrap());
    }

    #[test]
    fn softmin_keeps_constant_fields_fixed() {
        let g = path_graph(4);
        let f = ScalarField::constant(4, 1.25);
        for lambda in [0.5, 10.0, 1e4] {
            let out = softmin_smooth_step(&g, &f, 0.0, lambda).unwrap();
            for i in 0..4 {
                assert!((out[i] - 1.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softmin_approaches_the_exact_min_for_large_lambda() {
        // node 1 candidates: {5, 0+0.5, 1+0.5} = {5, 0.5, 1.5}
        let g = path_graph(3);
        let f = field(&[0.0, 5.0, 1.0]);
        let out = softmin_smooth_step(&g, &f, 0.5, 100.0).unwrap();
        assert!((out[1] - 0.5).abs() < 1e-10, "got {}", out[1]);

        // unit-scale field with candidate gaps >= 1e-2: pointwise 1e-8 at λ=1e4
        let g2 = path_graph(5);
        let f2 = field(&[0.13, 0.51, 0.97, 0.29, 0.75]);
        let exact = exact_smooth_step(&g2, &f2, 0.02).unwrap();
        let soft = softmin_smooth_step(&g2, &f2, 0.02, 1e4).unwrap();
        for i in 0..5 {
            assert!(
                (exact[i] - soft[i]).abs() < 1e-8,
                "node {i}: exact {} vs softmin {}",
                exact[i],
                soft[i]
            );
        }
    }

    #[test]
    fn softmin_at_small_lambda_tends_to_the_neighborhood_mean() {
        let g = path_graph(3);
        let f = field(&[0.0, 5.0, 1.0]);
        let out = softmin_smooth_step(&g, &f, 0.0, 1e-9).unwrap();
        let mean1 = (5.0 + 0.0 + 1.0) / 3.0;
        assert!((out[1] - mean1).abs() < 1e-6);
    }

    #[test]
    fn derivative_at_c_zero_is_the_diffusion_stencil() {
        let g = path_graph(4);
        let phi = field(&[0.4, -1.2, 2.0, 0.7]);
        for i in 0..4 {
            let stencil = {
                let sum: f64 = g.out_neighbors(i).iter().map(|&u| phi[u]).sum();
                (phi[i] + sum) / (g.degree(i) as f64 + 1.0)
            };
            let d = softmin_directional_derivative(&g, &phi, 0.0, 3.0, i).unwrap();
            assert!((d - stencil).abs() < 1e-14, "node {i}: {d} vs {stencil}");
        }
    }

    #[test]
    fn derivative_matches_central_finite_differences() {
        // oracle: d/dε softmin{ε·φ}(i) ≈ (N(ε) − N(−ε)) / 2ε on the zero field
        let g = path_graph(4);
        let phi = field(&[0.9, 0.2, 0.6, 0.4]);
        let eps = 1e-5;
        for (c, lambda) in [(0.0, 1.0), (0.3, 2.0), (0.05, 8.0)] {
            for i in 0..4 {
                let plus = ScalarField::new(phi.values().iter().map(|v| eps * v).collect())
                    .unwrap();
                let minus = ScalarField::new(phi.values().iter().map(|v| -eps * v).collect())
                    .unwrap();
                let n_plus = softmin_smooth_step(&g, &plus, c, lambda).unwrap();
                let n_minus = softmin_smooth_step(&g, &minus, c, lambda).unwrap();
                let fd = (n_plus[i] - n_minus[i]) / (2.0 * eps);
                let d = softmin_directional_derivative(&g, &phi, c, lambda, i).unwrap();
                let denom = d.abs().max(1e-12);
                assert!(
                    ((fd - d) / denom).abs() < 1e-6,
                    "c={c} λ={lambda} node {i}: fd {fd} vs closed form {d}"
                );
            }
        }
    }

    #[test]
    fn derivative_of_the_zero_direction_is_zero() {
        let g = path_graph(3);
        let phi = ScalarField::constant(3, 0.0);
        for i in 0..3 {
            assert_eq!(
                softmin_directional_derivative(&g, &phi, 0.0, 5.0, i).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn diffusion_identity_and_one_step() {
        let g = path_graph(3);
        let f = field(&[0.0, 5.0, 1.0]);
        assert_eq!(exact_diffusion(&g, &f, 0).unwrap(), f);
        let one = exact_diffusion(&g, &f, 1).unwrap();
        assert_eq!(one.values(), [2.5, 2.0, 3.0]);
    }

    #[test]
    fn diffusion_fixes_constant_fields() {
        let g = path_graph(6);
        let f = ScalarField::constant(6, 0.8);
        for t in 0..5 {
            let out = exact_diffusion(&g, &f, t).unwrap();
            for i in 0..6 {
                assert!((out[i] - 0.8).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mc_estimate_with_zero_walk_is_exact() {
        let g = path_graph(3);
        let mut obj = FieldObjective::new(field(&[0.0, 5.0, 1.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(mc_smoothed_value(&g, &mut obj, 1, 0, &mut rng), 5.0);
        assert_eq!(obj.evaluations(), 1);
    }

    #[test]
    fn mc_estimate_on_isolated_node_is_exact_for_any_t() {
        let g = ProximityGraph::from_adjacency(vec![vec![1], vec![]]).unwrap();
        let mut obj = FieldObjective::new(field(&[3.0, 7.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for t in 0..5 {
            assert_eq!(mc_smoothed_value(&g, &mut obj, 1, t, &mut rng), 7.0);
        }
    }

    #[test]
    fn mc_estimator_is_unbiased_for_the_diffusion() {
        let g = path_graph(4);
        let f = field(&[0.0, 5.0, 1.0, 2.0]);
        let exact = exact_diffusion(&g, &f, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let samples = 100_000;
        for i in 0..4 {
            let mut obj = FieldObjective::new(f.clone());
            let draws: Vec<f64> = (0..samples)
                .map(|_| mc_smoothed_value(&g, &mut obj, i, 1, &mut rng))
                .collect();
            let mean = draws.iter().sum::<f64>() / samples as f64;
            let var = draws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (samples - 1) as f64;
            let se = (var / samples as f64).sqrt();
            assert!(
                (mean - exact[i]).abs() <= 3.0 * se.max(1e-12),
                "node {i}: mean {mean} vs exact {}",
                exact[i]
            );
        }
    }

    #[test]
    fn mc_mean_averages_multiple_samples() {
        let g = path_graph(3);
        let f = field(&[0.0, 6.0, 3.0]);
        let mut obj = FieldObjective::new(f.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let est = mc_smoothed_mean(&g, &mut obj, 1, 1, 50_000, &mut rng);
        let exact = exact_diffusion(&g, &f, 1).unwrap();
        assert!((est - exact[1]).abs() < 0.05);
    }

    #[test]
    fn params_validate_ranges() {
        assert!(SmoothingParams::new(-1.0, 1.0, 0).is_err());
        assert!(SmoothingParams::new(0.0, 0.0, 0).is_err());
        assert!(SmoothingParams::new(0.0, 1.0, 3).is_ok());
        let f = field(&[0.0, 10.0]);
        let c = SmoothingParams::default_increment(&f);
        assert!((c - 1e-5).abs() < 1e-18);
    }
}
