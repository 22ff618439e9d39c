//! Flavor-palate clustering.
//!
//! All distances are squared Euclidean. Ties resolve to the lowest cluster
//! id, and all randomness comes from explicitly seeded generators, so a fit
//! is reproducible bit-for-bit from its seed.

mod elbow;
mod gmm;
mod kmeans;
mod minibatch;

pub use elbow::{elbow_scan, ElbowCurve, DEFAULT_ELBOW_KS, DEFAULT_ELBOW_THRESHOLD};
pub use gmm::{em_fit, gmm_responsibilities, GmmModel, GmmParams, VARIANCE_FLOOR};
pub use kmeans::{kmeans_fit, KMeansModel, KMeansParams};
pub use minibatch::{minibatch_kmeans_fit, MiniBatchParams};

use rand::Rng;
use rayon::prelude::*;

use crate::featurize::{top_indices, VocabIndex};
use crate::matrix::{sq_norm, Points};
use crate::{Error, Result};

/// Models exposing one representative vector per cluster.
pub trait ClusterCenters {
    fn centers(&self) -> &[Vec<f64>];
}

/// For each cluster, the `top` highest-valued center dimensions as tokens,
/// descending by value with ties broken lexicographically. Only positive
/// entries are reported.
pub fn centroid_keywords<M: ClusterCenters + ?Sized>(model: &M, vocab: &VocabIndex, top: usize) -> Vec<Vec<String>> {
    model
        .centers()
        .iter()
        .map(|c| {
            assert_eq!(c.len(), vocab.len(), "model dimension differs from vocabulary");
            top_indices(c, top, vocab)
                .into_iter()
                .map(|j| vocab.term(j).to_owned())
                .collect()
        })
        .collect()
}

pub(crate) fn check_k<P: Points + ?Sized>(x: &P, k: usize) -> Result<Vec<usize>> {
    let active = x.active_rows();
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    if k > active.len() {
        return Err(Error::TooManyClusters { k, rows: active.len() });
    }
    Ok(active)
}

/// Nearest center for every row, with its squared distance. Ties go to the
/// lowest center id.
pub(crate) fn assign_all<P: Points + ?Sized>(x: &P, centers: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    let norms: Vec<f64> = centers.iter().map(|c| sq_norm(c)).collect();
    (0..x.n_rows())
        .into_par_iter()
        .map(|i| nearest(x, i, centers, &norms))
        .unzip()
}

pub(crate) fn nearest<P: Points + ?Sized>(x: &P, i: usize, centers: &[Vec<f64>], norms: &[f64]) -> (usize, f64) {
    let row = x.row(i);
    let mut best = (0, f64::INFINITY);
    for (c, (center, &norm)) in centers.iter().zip(norms).enumerate() {
        let d = row.sq_dist(center, norm);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// k-means++ seeding over the active rows.
pub(crate) fn kmeans_plus_plus<P: Points + ?Sized, R: Rng>(
    x: &P,
    active: &[usize],
    k: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let dim = x.dim();
    let first = active[rng.random_range(0..active.len())];
    let mut chosen = vec![first];
    let mut centers = vec![x.row(first).to_dense(dim)];
    let mut d2: Vec<f64> = {
        let c = &centers[0];
        let n = sq_norm(c);
        active.iter().map(|&i| x.row(i).sq_dist(c, n)).collect()
    };
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (pos, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(pos);
                    break;
                }
            }
            // Rounding can leave `acc` just short of `target`.
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).expect("positive total"))
        } else {
            active
                .iter()
                .position(|i| !chosen.contains(i))
                .expect("k does not exceed active rows")
        };
        let row = active[pick];
        chosen.push(row);
        let c = x.row(row).to_dense(dim);
        let n = sq_norm(&c);
        for (slot, &i) in d2.iter_mut().zip(active) {
            let d = x.row(i).sq_dist(&c, n);
            if d < *slot {
                *slot = d;
            }
        }
        centers.push(c);
    }
    centers
}
