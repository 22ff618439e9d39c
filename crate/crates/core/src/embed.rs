//! GloVe word vectors trained on the review corpus, and review embeddings
//! built as TF-IDF-weighted means of those vectors.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::featurize::VocabIndex;
use crate::matrix::{DenseMatrix, FeatureMatrix, Points, Row};
use crate::seed::rng;
use crate::{Error, Result};

pub const DEFAULT_WINDOW: usize = 5;

/// Symmetric word-pair counts weighted by `1 / distance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceTable {
    pub entries: BTreeMap<(usize, usize), f64>,
    pub window: usize,
    pub vocab_size: usize,
}

impl CooccurrenceTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Counts co-occurrences within `window` positions. Out-of-vocabulary tokens
/// keep their positions but form no pairs; a word paired with itself is
/// not counted.
pub fn build_cooccurrence(token_lists: &[Vec<String>], vocab: &VocabIndex, window: usize) -> CooccurrenceTable {
    let mut entries = BTreeMap::new();
    for doc in token_lists {
        let ids: Vec<Option<usize>> = doc.iter().map(|t| vocab.column(t)).collect();
        for (pos, &a) in ids.iter().enumerate() {
            let Some(a) = a else { continue };
            for dist in 1..=window {
                let Some(&Some(b)) = ids.get(pos + dist) else {
                    continue;
                };
                if a == b {
                    continue;
                }
                let w = 1.0 / dist as f64;
                *entries.entry((a, b)).or_insert(0.0) += w;
                *entries.entry((b, a)).or_insert(0.0) += w;
            }
        }
    }
    CooccurrenceTable {
        entries,
        window,
        vocab_size: vocab.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GloveParams {
    pub dim: usize,
    pub x_max: f64,
    pub alpha: f64,
    pub epochs: usize,
    pub rate: f64,
    pub seed: u64,
}

impl Default for GloveParams {
    fn default() -> Self {
        GloveParams {
            dim: 50,
            x_max: 100.0,
            alpha: 0.75,
            epochs: 25,
            rate: 0.05,
            seed: 0,
        }
    }
}

/// GloVe weighting `min(1, (x / x_max)^alpha)`.
pub fn glove_weight(x: f64, x_max: f64, alpha: f64) -> f64 {
    if x >= x_max {
        1.0
    } else {
        (x / x_max).powf(alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordVectors {
    pub dim: usize,
    pub vocab_size: usize,
    pub main: Vec<f64>,
    pub context: Vec<f64>,
    pub main_bias: Vec<f64>,
    pub context_bias: Vec<f64>,
    /// Weighted least-squares loss after each epoch.
    pub epoch_losses: Vec<f64>,
}

impl WordVectors {
    /// Final vector of word `j`: main plus context vector.
    pub fn vector(&self, j: usize) -> Vec<f64> {
        let r = j * self.dim..(j + 1) * self.dim;
        self.main[r.clone()]
            .iter()
            .zip(&self.context[r])
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn loss_table(&self) -> String {
        let mut s = String::from("epoch\tloss\n");
        for (e, l) in self.epoch_losses.iter().enumerate() {
            s.push_str(&format!("{}\t{l:.6}\n", e + 1));
        }
        s
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn loss(cooc: &CooccurrenceTable, v: &WordVectors, p: &GloveParams) -> f64 {
    let d = v.dim;
    cooc.entries
        .iter()
        .map(|(&(i, j), &x)| {
            let wi = &v.main[i * d..(i + 1) * d];
            let wj = &v.context[j * d..(j + 1) * d];
            let diff = wi.iter().zip(wj).map(|(a, b)| a * b).sum::<f64>() + v.main_bias[i] + v.context_bias[j] - x.ln();
            glove_weight(x, p.x_max, p.alpha) * diff * diff
        })
        .sum()
}

/// Trains GloVe vectors with AdaGrad. Single-threaded, deterministic given
/// `params.seed`.
pub fn train_glove(cooc: &CooccurrenceTable, params: &GloveParams) -> Result<WordVectors> {
    if cooc.is_empty() {
        return Err(Error::invalid("cooc", "empty co-occurrence table"));
    }
    if params.dim == 0 {
        return Err(Error::invalid("dim", "must be positive"));
    }
    let (n, d) = (cooc.vocab_size, params.dim);
    let mut gen = rng(params.seed);
    let mut init = |len: usize| -> Vec<f64> {
        (0..len)
            .map(|_| (gen.random::<f64>() - 0.5) / (d as f64 + 1.0))
            .collect()
    };
    let mut v = WordVectors {
        dim: d,
        vocab_size: n,
        main: init(n * d),
        context: init(n * d),
        main_bias: init(n),
        context_bias: init(n),
        epoch_losses: Vec::with_capacity(params.epochs),
    };
    let mut gsq_main = vec![1.0f64; n * d];
    let mut gsq_ctx = vec![1.0f64; n * d];
    let mut gsq_main_b = vec![1.0f64; n];
    let mut gsq_ctx_b = vec![1.0f64; n];

    let mut order: Vec<(usize, usize, f64)> = cooc.entries.iter().map(|(&(i, j), &x)| (i, j, x)).collect();
    for epoch in 0..params.epochs {
        order.shuffle(&mut gen);
        for &(i, j, x) in &order {
            let (ri, rj) = (i * d..(i + 1) * d, j * d..(j + 1) * d);
            let diff = v.main[ri.clone()]
                .iter()
                .zip(&v.context[rj.clone()])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                + v.main_bias[i]
                + v.context_bias[j]
                - x.ln();
            let fdiff = glove_weight(x, params.x_max, params.alpha) * diff;
            if !fdiff.is_finite() {
                return Err(Error::NumericalFailure { iteration: epoch });
            }
            for t in 0..d {
                let (a, b) = (ri.start + t, rj.start + t);
                let g_main = fdiff * v.context[b];
                let g_ctx = fdiff * v.main[a];
                v.main[a] -= params.rate * g_main / gsq_main[a].sqrt();
                v.context[b] -= params.rate * g_ctx / gsq_ctx[b].sqrt();
                gsq_main[a] += g_main * g_main;
                gsq_ctx[b] += g_ctx * g_ctx;
            }
            v.main_bias[i] -= params.rate * fdiff / gsq_main_b[i].sqrt();
            v.context_bias[j] -= params.rate * fdiff / gsq_ctx_b[j].sqrt();
            gsq_main_b[i] += fdiff * fdiff;
            gsq_ctx_b[j] += fdiff * fdiff;
        }
        let l = loss(cooc, &v, params);
        if !l.is_finite() {
            return Err(Error::NumericalFailure { iteration: epoch });
        }
        v.epoch_losses.push(l);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedReview {
    pub vector: Vec<f64>,
    /// No in-vocabulary token; `vector` is all zeros.
    pub empty: bool,
}

/// Weighted mean of the review's in-vocabulary word vectors, each distinct
/// word weighted by its entry in `weights` (the review's TF-IDF row). Weights
/// are normalized, so scaling them changes nothing. If every weight is zero
/// the words are averaged uniformly.
pub fn embed_review(tokens: &[String], vectors: &WordVectors, vocab: &VocabIndex, weights: Row<'_>) -> EmbeddedReview {
    let words: BTreeSet<usize> = tokens.iter().filter_map(|t| vocab.column(t)).collect();
    let mut out = vec![0.0; vectors.dim];
    if words.is_empty() {
        return EmbeddedReview {
            vector: out,
            empty: true,
        };
    }
    let mut w: Vec<(usize, f64)> = words.iter().map(|&j| (j, weights.get(j).max(0.0))).collect();
    let total: f64 = w.iter().map(|(_, x)| x).sum();
    if total <= 0.0 {
        for (_, x) in &mut w {
            *x = 1.0;
        }
    }
    let total: f64 = w.iter().map(|(_, x)| x).sum();
    for (j, x) in w {
        for (o, v) in out.iter_mut().zip(vectors.vector(j)) {
            *o += x / total * v;
        }
    }
    EmbeddedReview {
        vector: out,
        empty: false,
    }
}

/// Embeds every review; empty embeddings are excluded from later fits.
pub fn embed_corpus(
    token_lists: &[Vec<String>],
    vectors: &WordVectors,
    vocab: &VocabIndex,
    x: &FeatureMatrix,
) -> DenseMatrix {
    let embedded: Vec<EmbeddedReview> = token_lists
        .iter()
        .enumerate()
        .map(|(i, t)| embed_review(t, vectors, vocab, x.row(i)))
        .collect();
    let rows: Vec<Vec<f64>> = embedded.iter().map(|e| e.vector.clone()).collect();
    let mut m = DenseMatrix::from_rows(&rows);
    for (i, e) in embedded.iter().enumerate() {
        m.set_inactive(i, e.empty);
    }
    m
}
