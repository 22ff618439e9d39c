//! Tokenization, vocabulary and TF-IDF featurization.
//!
//! The TF-IDF variant is raw-count term frequency times the smoothed inverse
//! document frequency `ln((1 + N) / (1 + df)) + 1`, followed by Euclidean
//! normalization of each row.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans_fit, KMeansParams};
use crate::matrix::FeatureMatrix;
use crate::seed::derive_indexed;
use crate::{Error, Result};

const GENERIC_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
const DOMAIN_STOPWORDS: &str = include_str!("../data/domain_stopwords.txt");

pub const DEFAULT_MIN_DF: usize = 2;

/// Splits review text into lowercase tokens.
///
/// Non-alphanumeric characters separate tokens. Tokens shorter than two
/// characters and purely numeric tokens are dropped. Stopwords are kept here
/// and removed when the vocabulary is built.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !t.chars().all(|c| c.is_numeric()))
        .map(str::to_owned)
        .collect()
}

/// Parses a stopword file: one token per line, `#` starts a comment.
pub fn parse_stopword_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopwordSets {
    pub generic: BTreeSet<String>,
    pub domain: BTreeSet<String>,
}

impl Default for StopwordSets {
    fn default() -> Self {
        StopwordSets {
            generic: parse_stopword_list(GENERIC_STOPWORDS),
            domain: default_domain_stopwords(),
        }
    }
}

impl StopwordSets {
    pub fn empty() -> Self {
        StopwordSets {
            generic: BTreeSet::new(),
            domain: BTreeSet::new(),
        }
    }

    /// Loads either set from a file, falling back to the shipped lists.
    pub fn load(generic: Option<&Path>, domain: Option<&Path>) -> Result<Self> {
        let defaults = Self::default();
        let read = |p: &Path| -> Result<BTreeSet<String>> { Ok(parse_stopword_list(&std::fs::read_to_string(p)?)) };
        Ok(StopwordSets {
            generic: generic.map(read).transpose()?.unwrap_or(defaults.generic),
            domain: domain.map(read).transpose()?.unwrap_or(defaults.domain),
        })
    }

    pub fn contains(&self, token: &str) -> bool {
        self.generic.contains(token) || self.domain.contains(token)
    }
}

/// The 18 domain stopwords removed from the cleaned corpus.
pub fn default_domain_stopwords() -> BTreeSet<String> {
    parse_stopword_list(DOMAIN_STOPWORDS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabParts")]
pub struct VocabIndex {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

#[derive(Deserialize)]
struct VocabParts {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
}

impl TryFrom<VocabParts> for VocabIndex {
    type Error = Error;

    fn try_from(p: VocabParts) -> Result<Self> {
        VocabIndex::from_parts(p.terms, p.doc_freq)
    }
}

impl VocabIndex {
    /// Builds an index from sorted distinct terms and their document frequencies.
    pub fn from_parts(terms: Vec<String>, doc_freq: Vec<usize>) -> Result<Self> {
        if terms.len() != doc_freq.len() {
            return Err(Error::invalid("doc_freq", "length differs from terms"));
        }
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let index: HashMap<String, usize> = terms.iter().enumerate().map(|(j, t)| (t.clone(), j)).collect();
        if index.len() != terms.len() {
            return Err(Error::invalid("terms", "duplicate term"));
        }
        Ok(VocabIndex { terms, doc_freq, index })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, j: usize) -> &str {
        &self.terms[j]
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn column(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }
}

/// Builds the vocabulary: tokens present in at least `min_df` documents, minus
/// both stopword sets, in lexicographic order.
pub fn build_vocabulary(token_lists: &[Vec<String>], stops: &StopwordSets, min_df: usize) -> Result<VocabIndex> {
    if token_lists.is_empty() {
        return Err(Error::invalid("token_lists", "no documents"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in token_lists {
        let distinct: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    let (terms, doc_freq): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(t, n)| n >= min_df.max(1) && !stops.contains(t))
        .map(|(t, n)| (t.to_owned(), n))
        .unzip();
    VocabIndex::from_parts(terms, doc_freq)
}

/// Smoothed inverse document frequency.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Featurized {
    pub matrix: FeatureMatrix,
    pub idf: Vec<f64>,
    /// Documents with no in-vocabulary token.
    pub empty_rows: Vec<usize>,
}

/// Computes the row-normalized TF-IDF matrix over `token_lists`.
pub fn compute_tfidf(token_lists: &[Vec<String>], vocab: &VocabIndex) -> Featurized {
    let n = token_lists.len();
    let idf: Vec<f64> = vocab.doc_freq().iter().map(|&df| smoothed_idf(n, df)).collect();
    tfidf_with_idf(token_lists, vocab, &idf)
}

/// TF-IDF with a fixed idf vector (used when rebuilding from a saved model).
pub fn tfidf_with_idf(token_lists: &[Vec<String>], vocab: &VocabIndex, idf: &[f64]) -> Featurized {
    use rayon::prelude::*;

    let rows: Vec<Vec<(usize, f64)>> = token_lists
        .par_iter()
        .map(|doc| {
            let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
            for t in doc {
                if let Some(j) = vocab.column(t) {
                    *counts.entry(j).or_default() += 1.0;
                }
            }
            let mut row: Vec<(usize, f64)> = counts.into_iter().map(|(j, tf)| (j, tf * idf[j])).collect();
            let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in &mut row {
                    *v /= norm;
                }
            }
            row
        })
        .collect();
    let matrix = FeatureMatrix::from_rows(vocab.len(), rows);
    let empty_rows = matrix.empty_rows();
    Featurized {
        matrix,
        idf: idf.to_vec(),
        empty_rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopwordCandidate {
    pub token: String,
    /// Share of all fitted clusters (over every run) whose top centroid
    /// entries include this token.
    pub fraction: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DiscoveryParams {
    pub runs: usize,
    pub k: usize,
    pub top: usize,
    pub fraction: f64,
    pub seed: u64,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        DiscoveryParams {
            runs: 3,
            k: 8,
            top: 25,
            fraction: 0.75,
            seed: 0,
        }
    }
}

/// Proposes domain stopwords: tokens that rank among the top centroid entries
/// of most clusters across repeated k-means runs. Candidates are meant for
/// manual review; nothing is removed here.
pub fn discover_domain_stopwords(
    x: &FeatureMatrix,
    vocab: &VocabIndex,
    params: DiscoveryParams,
) -> Result<Vec<StopwordCandidate>> {
    if params.runs == 0 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    if x.rows() == 0 {
        return Err(Error::invalid("X", "empty matrix"));
    }
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for run in 0..params.runs {
        let seed = derive_indexed(params.seed, "stopword-discovery", run as u64);
        let model = kmeans_fit(x, &KMeansParams::new(params.k, seed))?;
        for centroid in &model.centroids {
            for j in top_indices(centroid, params.top, vocab) {
                *hits.entry(j).or_default() += 1;
            }
        }
    }
    let total = (params.runs * params.k) as f64;
    let mut out: Vec<StopwordCandidate> = hits
        .into_iter()
        .map(|(j, n)| StopwordCandidate {
            token: vocab.term(j).to_owned(),
            fraction: n as f64 / total,
        })
        .filter(|c| c.fraction >= params.fraction)
        .collect();
    out.sort_by(|a, b| b.fraction.total_cmp(&a.fraction).then_with(|| a.token.cmp(&b.token)));
    Ok(out)
}

/// Indices of the `top` largest positive entries, ties broken by term order.
pub(crate) fn top_indices(values: &[f64], top: usize, vocab: &VocabIndex) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&j| values[j] > 0.0).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .total_cmp(&values[a])
            .then_with(|| vocab.term(a).cmp(vocab.term(b)))
    });
    idx.truncate(top);
    idx
}
