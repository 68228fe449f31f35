//! Synthetic Gaussian-cluster datasets for desk-scale experiments.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset};

/// One standard-normal draw via Box-Muller.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// `clusters` isotropic unit-variance Gaussians of `per_cluster` points each.
///
/// Cluster means sit on the first axis at spacing `separation`, so every pair
/// of means is at least `separation` apart. The label of each point is its
/// cluster id; class names are zero-padded so lexicographic order matches id
/// order. Output is a pure function of the arguments.
pub fn make_gaussian_clusters(
    clusters: usize,
    per_cluster: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset, DataError> {
    if clusters == 0 || per_cluster == 0 {
        return Err(DataError::Empty);
    }
    if dim == 0 {
        return Err(DataError::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = clusters * per_cluster;
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for cluster in 0..clusters {
        let offset = separation * cluster as f64;
        for _ in 0..per_cluster {
            features.push(offset + standard_normal(&mut rng));
            for _ in 1..dim {
                features.push(standard_normal(&mut rng));
            }
            labels.push(cluster as u32);
        }
    }
    let width = (clusters.max(2) - 1).to_string().len();
    let classes = (0..clusters).map(|c| format!("c{c:0width$}")).collect();
    Dataset::new(features, dim, Some(labels), classes)
}
