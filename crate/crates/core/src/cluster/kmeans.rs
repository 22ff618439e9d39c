use serde::{Deserialize, Serialize};

use super::{assign_all, check_k, kmeans_plus_plus, ClusterCenters};
use crate::matrix::Points;
use crate::seed::{derive_indexed, rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative SSE improvement falls below this.
    pub tol: f64,
    pub restarts: usize,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansParams {
            k,
            seed,
            max_iter: 100,
            tol: 1e-4,
            restarts: 1,
        }
    }

    pub fn restarts(self, restarts: usize) -> Self {
        KMeansParams { restarts, ..self }
    }

    pub fn max_iter(self, max_iter: usize) -> Self {
        KMeansParams { max_iter, ..self }
    }

    pub fn tol(self, tol: f64) -> Self {
        KMeansParams { tol, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    #[serde(with = "crate::packed")]
    pub centroids: Vec<Vec<f64>>,
    /// Nearest centroid of every row, including rows excluded from the fit.
    pub assignments: Vec<usize>,
    /// Within-cluster sum of squared distances over the fitted rows.
    pub sse: f64,
    pub iterations_run: usize,
    pub seed: u64,
    /// SSE after each assignment step.
    pub sse_history: Vec<f64>,
}

impl ClusterCenters for KMeansModel {
    fn centers(&self) -> &[Vec<f64>] {
        &self.centroids
    }
}

impl KMeansModel {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }
}

/// Lloyd's algorithm from k-means++ seeding, keeping the lowest-SSE restart.
pub fn kmeans_fit<P: Points + ?Sized>(x: &P, params: &KMeansParams) -> Result<KMeansModel> {
    let active = check_k(x, params.k)?;
    if params.restarts == 0 {
        return Err(Error::invalid("restarts", "must be at least 1"));
    }
    let mut best: Option<KMeansModel> = None;
    for r in 0..params.restarts {
        let seed = derive_indexed(params.seed, "kmeans-restart", r as u64);
        let model = lloyd(x, &active, params, seed);
        if best.as_ref().is_none_or(|b| model.sse < b.sse) {
            best = Some(model);
        }
    }
    let mut best = best.expect("at least one restart");
    best.seed = params.seed;
    Ok(best)
}

fn lloyd<P: Points + ?Sized>(x: &P, active: &[usize], params: &KMeansParams, seed: u64) -> KMeansModel {
    let k = params.k;
    let dim = x.dim();
    let mut gen = rng(seed);
    let mut centroids = kmeans_plus_plus(x, active, k, &mut gen);
    let mut history = Vec::new();
    let mut prev_assign: Option<Vec<usize>> = None;

    loop {
        let (mut assign, mut dist) = assign_all(x, &centroids);
        let sse: f64 = active.iter().map(|&i| dist[i]).sum();
        history.push(sse);
        let converged = match (history.len(), prev_assign.as_ref()) {
            (n, Some(prev)) if n >= 2 => {
                let last = history[n - 2];
                prev == &assign || last <= 0.0 || (last - sse) / last < params.tol
            }
            _ => false,
        };
        if converged || history.len() >= params.max_iter.max(1) {
            return KMeansModel {
                k,
                centroids,
                iterations_run: history.len(),
                sse,
                assignments: assign,
                seed,
                sse_history: history,
            };
        }

        let mut counts = vec![0usize; k];
        for &i in active {
            counts[assign[i]] += 1;
        }
        // Empty clusters take the point farthest from its centroid, drawn
        // from clusters that can spare one.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let donor = active
                .iter()
                .copied()
                .filter(|&i| counts[assign[i]] > 1)
                .fold(None::<usize>, |best, i| match best {
                    Some(b) if dist[b] >= dist[i] => Some(b),
                    _ => Some(i),
                })
                .expect("k does not exceed active rows");
            counts[assign[donor]] -= 1;
            assign[donor] = c;
            dist[donor] = 0.0;
            counts[c] = 1;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for &i in active {
            x.row(i).add_scaled_to(&mut sums[assign[i]], 1.0);
        }
        for (c, sum) in sums.into_iter().enumerate() {
            let n = counts[c] as f64;
            centroids[c] = sum.into_iter().map(|s| s / n).collect();
        }
        prev_assign = Some(assign);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{DenseMatrix, FeatureMatrix};
    use proptest::prelude::*;

    fn line(points: &[f64]) -> DenseMatrix {
        DenseMatrix::from_rows(&points.iter().map(|&p| vec![p]).collect::<Vec<_>>())
    }

    /// Brute force over every 2-partition of a small 1-D set.
    fn best_two_partition(points: &[f64]) -> f64 {
        let n = points.len();
        let mut best = f64::INFINITY;
        for mask in 1..(1u32 << n) - 1 {
            let mut sse = 0.0;
            for side in [true, false] {
                let members: Vec<f64> = (0..n)
                    .filter(|&i| ((mask >> i) & 1 == 1) == side)
                    .map(|i| points[i])
                    .collect();
                let mean = members.iter().sum::<f64>() / members.len() as f64;
                sse += members.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>();
            }
            best = best.min(sse);
        }
        best
    }

    #[test]
    fn four_point_fixture_matches_brute_force() {
        let pts = [0.0, 1.0, 10.0, 11.0];
        let oracle = best_two_partition(&pts);
        assert_eq!(oracle, 1.0);
        for seed in 0..10 {
            let m = kmeans_fit(&line(&pts), &KMeansParams::new(2, seed).restarts(4)).unwrap();
            assert!((m.sse - oracle).abs() < 1e-12, "seed {seed}: {}", m.sse);
            let mut c: Vec<f64> = m.centroids.iter().map(|c| c[0]).collect();
            c.sort_by(f64::total_cmp);
            assert_eq!(c, vec![0.5, 10.5]);
        }
    }

    #[test]
    fn one_centroid_per_distinct_row() {
        let pts = [0.0, 3.0, 3.0, 7.0, 12.0];
        let m = kmeans_fit(&line(&pts), &KMeansParams::new(4, 1)).unwrap();
        assert_eq!(m.sse, 0.0);
        let sparse = FeatureMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]]);
        let m = kmeans_fit(&sparse, &KMeansParams::new(3, 9)).unwrap();
        assert!(m.sse < 1e-12);
    }

    #[test]
    fn too_many_clusters() {
        let x = FeatureMatrix::from_rows(2, vec![vec![(0, 1.0)], vec![], vec![(1, 1.0)]]);
        assert!(matches!(
            kmeans_fit(&x, &KMeansParams::new(3, 0)),
            Err(Error::TooManyClusters { k: 3, rows: 2 })
        ));
        assert!(kmeans_fit(&x, &KMeansParams::new(0, 0)).is_err());
    }

    #[test]
    fn empty_rows_are_assigned_but_not_fitted() {
        let x = FeatureMatrix::from_rows(2, vec![vec![(0, 1.0)], vec![], vec![(1, 1.0)], vec![(0, 1.0)]]);
        let m = kmeans_fit(&x, &KMeansParams::new(2, 4)).unwrap();
        assert_eq!(m.assignments.len(), 4);
        assert!(m.sse < 1e-12);
        assert_eq!(m.assignments[0], m.assignments[3]);
    }

    #[test]
    fn deterministic() {
        let pts: Vec<f64> = (0..40).map(|i| ((i * 37) % 23) as f64).collect();
        let a = kmeans_fit(&line(&pts), &KMeansParams::new(3, 5).restarts(2)).unwrap();
        let b = kmeans_fit(&line(&pts), &KMeansParams::new(3, 5).restarts(2)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn lloyd_invariants(
            pts in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 3), 6..40),
            k in 1usize..5,
            seed in 0u64..1000,
        ) {
            let x = DenseMatrix::from_rows(&pts);
            let m = kmeans_fit(&x, &KMeansParams::new(k, seed)).unwrap();
            for w in m.sse_history.windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-9));
            }
            let mut sse = 0.0;
            for (i, p) in pts.iter().enumerate() {
                let d: Vec<f64> = m.centroids.iter()
                    .map(|c| c.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum())
                    .collect();
                let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
                let first = d.iter().position(|&v| v == min).unwrap();
                prop_assert_eq!(m.assignments[i], first);
                sse += d[m.assignments[i]];
            }
            prop_assert!((sse - m.sse).abs() <= 1e-6 * sse.max(1e-12));
        }
    }
}
