use rand::seq::index::sample;

use super::{assign_all, check_k, kmeans_plus_plus, nearest, KMeansModel};
use crate::matrix::{sq_norm, Points};
use crate::seed::rng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiniBatchParams {
    pub k: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub max_iter: usize,
}

/// Mini-batch k-means with per-center learning rates.
///
/// Each center moves toward its batch points with rate `1 / n`, where `n`
/// counts every point ever assigned to it. A final full pass assigns every
/// row and computes the SSE.
pub fn minibatch_kmeans_fit<P: Points + ?Sized>(x: &P, params: &MiniBatchParams) -> Result<KMeansModel> {
    let active = check_k(x, params.k)?;
    if params.batch_size == 0 || params.batch_size > active.len() {
        return Err(Error::invalid(
            "batch_size",
            format!("must be in 1..={} (usable rows)", active.len()),
        ));
    }
    let mut gen = rng(params.seed);
    let mut centers = kmeans_plus_plus(x, &active, params.k, &mut gen);
    let mut counts = vec![0u64; params.k];

    for _ in 0..params.max_iter {
        let batch: Vec<usize> = sample(&mut gen, active.len(), params.batch_size)
            .into_iter()
            .map(|pos| active[pos])
            .collect();
        let norms: Vec<f64> = centers.iter().map(|c| sq_norm(c)).collect();
        let cached: Vec<usize> = batch.iter().map(|&i| nearest(x, i, &centers, &norms).0).collect();
        for (&i, &c) in batch.iter().zip(&cached) {
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            let center = &mut centers[c];
            for v in center.iter_mut() {
                *v *= 1.0 - eta;
            }
            x.row(i).add_scaled_to(center, eta);
        }
    }

    let (assignments, dist) = assign_all(x, &centers);
    let sse: f64 = active.iter().map(|&i| dist[i]).sum();
    Ok(KMeansModel {
        k: params.k,
        centroids: centers,
        assignments,
        sse,
        iterations_run: params.max_iter,
        seed: params.seed,
        sse_history: vec![sse],
    })
}
