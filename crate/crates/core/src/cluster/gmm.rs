//! Diagonal-covariance Gaussian mixture fitted by EM.
//!
//! Densities are evaluated in log space. For a row `x` and component `k` the
//! log-density splits into a per-component constant plus a sum over the
//! row's stored entries, so sparse rows cost `O(nnz)` per component.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_k, kmeans_fit, ClusterCenters, KMeansModel, KMeansParams};
use crate::matrix::{Points, Row};
use crate::seed::derive_seed;
use crate::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-6;
const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmmParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the relative log-likelihood improvement falls below this.
    pub tol: f64,
    pub variance_floor: f64,
}

impl GmmParams {
    pub fn new(k: usize, seed: u64) -> Self {
        GmmParams {
            k,
            seed,
            max_iter: 100,
            tol: 1e-5,
            variance_floor: VARIANCE_FLOOR,
        }
    }

    pub fn max_iter(self, max_iter: usize) -> Self {
        GmmParams { max_iter, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel {
    pub k: usize,
    #[serde(with = "crate::packed")]
    pub means: Vec<Vec<f64>>,
    #[serde(with = "crate::packed")]
    pub variances: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub log_likelihood: f64,
    pub seed: u64,
    pub variance_floor: f64,
    pub iterations_run: usize,
    /// Log-likelihood of the fitted rows at each E-step.
    pub ll_history: Vec<f64>,
    /// Most responsible component of every row, including rows excluded from the fit.
    pub assignments: Vec<usize>,
}

impl ClusterCenters for GmmModel {
    fn centers(&self) -> &[Vec<f64>] {
        &self.means
    }
}

/// Cached per-component terms of the log-density.
struct Densities {
    log_weights: Vec<f64>,
    base: Vec<f64>,
    inv_var: Vec<Vec<f64>>,
}

impl Densities {
    fn new(means: &[Vec<f64>], variances: &[Vec<f64>], weights: &[f64]) -> Self {
        let base = means
            .iter()
            .zip(variances)
            .map(|(mu, var)| {
                -0.5 * mu
                    .iter()
                    .zip(var)
                    .map(|(m, v)| (2.0 * PI * v).ln() + m * m / v)
                    .sum::<f64>()
            })
            .collect();
        let inv_var = variances
            .iter()
            .map(|var| var.iter().map(|v| 1.0 / v).collect())
            .collect();
        Densities {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            base,
            inv_var,
        }
    }

    /// `ln w_k + ln N(x; mu_k, var_k)` for every component.
    fn joint(&self, means: &[Vec<f64>], row: Row<'_>) -> Vec<f64> {
        (0..means.len())
            .map(|k| {
                let mu = &means[k];
                let iv = &self.inv_var[k];
                let mut quad = 0.0;
                row.for_each(|j, x| {
                    let m = mu[j];
                    quad += ((x - m) * (x - m) - m * m) * iv[j];
                });
                self.log_weights[k] + self.base[k] - 0.5 * quad
            })
            .collect()
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Normalizes joint log-probabilities into responsibilities; returns the
/// log normalizer too.
fn normalize(joint: &[f64]) -> (Vec<f64>, f64) {
    let lse = log_sum_exp(joint);
    let mut r: Vec<f64> = joint.iter().map(|l| (l - lse).exp()).collect();
    let s: f64 = r.iter().sum();
    for v in &mut r {
        *v /= s;
    }
    (r, lse)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl GmmModel {
    /// Posterior component probabilities for one row.
    pub fn responsibilities(&self, row: Row<'_>) -> Vec<f64> {
        let d = Densities::new(&self.means, &self.variances, &self.weights);
        normalize(&d.joint(&self.means, row)).0
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Standard deviation of component `k` along every dimension.
    pub fn std_devs(&self, k: usize) -> Vec<f64> {
        self.variances[k].iter().map(|v| v.sqrt()).collect()
    }
}

/// Posterior component probabilities of a dense coordinate.
pub fn gmm_responsibilities(model: &GmmModel, x: &[f64]) -> Vec<f64> {
    model.responsibilities(Row::Dense(x))
}

/// EM for a diagonal Gaussian mixture, initialized from `init` or from an
/// internal k-means run.
pub fn em_fit<P: Points + ?Sized>(x: &P, params: &GmmParams, init: Option<&KMeansModel>) -> Result<GmmModel> {
    let active = check_k(x, params.k)?;
    let owned;
    let init = match init {
        Some(m) => {
            if m.k != params.k || m.centroids.first().map(Vec::len) != Some(x.dim()) {
                return Err(Error::invalid("init", "k-means model does not match data"));
            }
            m
        }
        None => {
            owned = kmeans_fit(x, &KMeansParams::new(params.k, derive_seed(params.seed, "gmm-init")))?;
            &owned
        }
    };
    let floor = params.variance_floor;
    let (mut means, mut variances, mut weights) = init_from_kmeans(x, &active, init, floor);

    let mut history = Vec::new();
    loop {
        let dens = Densities::new(&means, &variances, &weights);
        let estep: Vec<(Vec<f64>, f64)> = active
            .par_iter()
            .map(|&i| normalize(&dens.joint(&means, x.row(i))))
            .collect();
        let ll: f64 = estep.iter().map(|(_, l)| l).sum();
        if !ll.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: history.len(),
            });
        }
        history.push(ll);
        let n = history.len();
        let converged = n >= 2 && {
            let prev = history[n - 2];
            (ll - prev) / prev.abs().max(f64::MIN_POSITIVE) < params.tol
        };
        if converged || n >= params.max_iter.max(1) {
            let assignments = (0..x.n_rows())
                .into_par_iter()
                .map(|i| argmax(&dens.joint(&means, x.row(i))))
                .collect();
            return Ok(GmmModel {
                k: params.k,
                means,
                variances,
                weights,
                log_likelihood: ll,
                seed: params.seed,
                variance_floor: floor,
                iterations_run: n,
                ll_history: history,
                assignments,
            });
        }
        m_step(x, &active, &estep, &mut means, &mut variances, &mut weights, floor);
    }
}

fn init_from_kmeans<P: Points + ?Sized>(
    x: &P,
    active: &[usize],
    init: &KMeansModel,
    floor: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
    let k = init.k;
    let dim = x.dim();
    let means = init.centroids.clone();
    let mut counts = vec![0usize; k];
    // Squared deviations from the centroid, accumulated over stored entries;
    // `nz_counts` tracks members with a stored entry per dimension so the
    // implicit zeros can be added afterwards.
    let mut sq_dev = vec![vec![0.0; dim]; k];
    let mut nz_counts = vec![vec![0usize; dim]; k];
    for &i in active {
        let c = init.assignments[i];
        counts[c] += 1;
        let mu = &means[c];
        x.row(i).for_each(|j, v| {
            sq_dev[c][j] += (v - mu[j]) * (v - mu[j]);
            nz_counts[c][j] += 1;
        });
    }
    let global = global_variance(x, active, floor);
    let variances = (0..k)
        .map(|c| {
            if counts[c] == 0 {
                return global.clone();
            }
            let n = counts[c] as f64;
            (0..dim)
                .map(|j| {
                    let zeros = (counts[c] - nz_counts[c][j]) as f64;
                    let mu = means[c][j];
                    ((sq_dev[c][j] + zeros * mu * mu) / n).max(floor)
                })
                .collect()
        })
        .collect();
    let total = active.len() as f64;
    let weights = normalize_weights(counts.iter().map(|&c| c as f64 / total).collect());
    (means, variances, weights)
}

fn global_variance<P: Points + ?Sized>(x: &P, active: &[usize], floor: f64) -> Vec<f64> {
    let dim = x.dim();
    let n = active.len() as f64;
    let mut mean = vec![0.0; dim];
    for &i in active {
        x.row(i).add_scaled_to(&mut mean, 1.0 / n);
    }
    let mut sq = vec![0.0; dim];
    let mut nz = vec![0usize; dim];
    for &i in active {
        x.row(i).for_each(|j, v| {
            sq[j] += (v - mean[j]) * (v - mean[j]);
            nz[j] += 1;
        });
    }
    (0..dim)
        .map(|j| {
            let zeros = (active.len() - nz[j]) as f64;
            ((sq[j] + zeros * mean[j] * mean[j]) / n).max(floor)
        })
        .collect()
}

fn normalize_weights(mut w: Vec<f64>) -> Vec<f64> {
    for v in &mut w {
        *v = v.max(WEIGHT_FLOOR);
    }
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

fn m_step<P: Points + ?Sized>(
    x: &P,
    active: &[usize],
    estep: &[(Vec<f64>, f64)],
    means: &mut [Vec<f64>],
    variances: &mut [Vec<f64>],
    weights: &mut Vec<f64>,
    floor: f64,
) {
    let k = means.len();
    let dim = x.dim();
    let mut mass = vec![0.0; k];
    let mut sums = vec![vec![0.0; dim]; k];
    for (&i, (resp, _)) in active.iter().zip(estep) {
        let row = x.row(i);
        for c in 0..k {
            let r = resp[c];
            if r == 0.0 {
                continue;
            }
            mass[c] += r;
            row.add_scaled_to(&mut sums[c], r);
        }
    }
    let mut new_means: Vec<Option<Vec<f64>>> = (0..k)
        .map(|c| (mass[c] > 0.0).then(|| sums[c].iter().map(|s| s / mass[c]).collect()))
        .collect();

    let mut sq_dev = vec![vec![0.0; dim]; k];
    let mut nz_mass = vec![vec![0.0; dim]; k];
    for (&i, (resp, _)) in active.iter().zip(estep) {
        let row = x.row(i);
        for c in 0..k {
            let (r, Some(mu)) = (resp[c], new_means[c].as_ref()) else {
                continue;
            };
            if r == 0.0 {
                continue;
            }
            let (dev, nzm) = (&mut sq_dev[c], &mut nz_mass[c]);
            row.for_each(|j, v| {
                dev[j] += r * (v - mu[j]) * (v - mu[j]);
                nzm[j] += r;
            });
        }
    }
    let total = active.len() as f64;
    for c in 0..k {
        // A component with no mass keeps its previous parameters.
        let Some(mu) = new_means[c].take() else {
            continue;
        };
        variances[c] = (0..dim)
            .map(|j| {
                let zero_mass = (mass[c] - nz_mass[c][j]).max(0.0);
                ((sq_dev[c][j] + zero_mass * mu[j] * mu[j]) / mass[c]).max(floor)
            })
            .collect();
        means[c] = mu;
    }
    *weights = normalize_weights(mass.iter().map(|m| m / total).collect());
}
