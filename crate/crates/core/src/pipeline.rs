//! End-to-end fitting: reviews in, model bundle out.

use serde::{Deserialize, Serialize};

use crate::cluster::{
    centroid_keywords, em_fit, kmeans_fit, minibatch_kmeans_fit, GmmModel, GmmParams, KMeansModel, KMeansParams,
    MiniBatchParams,
};
use crate::corpus::Review;
use crate::embed::{build_cooccurrence, embed_corpus, train_glove, GloveParams, WordVectors, DEFAULT_WINDOW};
use crate::featurize::{
    build_vocabulary, compute_tfidf, tfidf_with_idf, tokenize, Featurized, StopwordSets, VocabIndex, DEFAULT_MIN_DF,
};
use crate::recommend::RecommenderConfig;
use crate::seed::derive_seed;
use crate::service::{corpus_digest, ModelBundle};
use crate::{Error, Result};

pub const DEFAULT_K: usize = 32;
pub const KEYWORDS_PER_CLUSTER: usize = 10;

/// How the k-means stage that seeds EM is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMeansAlgorithm {
    #[default]
    Lloyd,
    MiniBatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub seed: u64,
    pub min_df: usize,
    pub restarts: usize,
    pub algorithm: KMeansAlgorithm,
    pub batch_size: usize,
    /// GloVe settings; `None` skips word-vector training.
    #[serde(skip)]
    pub glove: Option<GloveParams>,
    pub recommender: RecommenderConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            k: DEFAULT_K,
            seed: 0,
            min_df: DEFAULT_MIN_DF,
            restarts: 3,
            algorithm: KMeansAlgorithm::Lloyd,
            batch_size: 256,
            glove: None,
            recommender: RecommenderConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts", "must be at least 1"));
        }
        self.recommender.validate()
    }
}

/// Tokenized corpus with its vocabulary and TF-IDF matrix.
#[derive(Debug, Clone)]
pub struct Features {
    pub tokens: Vec<Vec<String>>,
    pub vocab: VocabIndex,
    pub featurized: Featurized,
}

pub fn tokenize_corpus(reviews: &[Review]) -> Vec<Vec<String>> {
    reviews.iter().map(|r| tokenize(&r.review_text)).collect()
}

pub fn featurize_corpus(reviews: &[Review], stopwords: &StopwordSets, min_df: usize) -> Result<Features> {
    let tokens = tokenize_corpus(reviews);
    let vocab = build_vocabulary(&tokens, stopwords, min_df)?;
    let featurized = compute_tfidf(&tokens, &vocab);
    if !featurized.empty_rows.is_empty() {
        log::info!("{} reviews have no in-vocabulary token", featurized.empty_rows.len());
    }
    Ok(Features {
        tokens,
        vocab,
        featurized,
    })
}

/// The k-means stage, using the configured algorithm and a `"kmeans"` sub-seed.
pub fn fit_kmeans(features: &Features, config: &PipelineConfig) -> Result<KMeansModel> {
    let x = &features.featurized.matrix;
    let seed = derive_seed(config.seed, "kmeans");
    match config.algorithm {
        KMeansAlgorithm::Lloyd => kmeans_fit(x, &KMeansParams::new(config.k, seed).restarts(config.restarts)),
        KMeansAlgorithm::MiniBatch => {
            let usable = x.rows() - features.featurized.empty_rows.len();
            minibatch_kmeans_fit(
                x,
                &MiniBatchParams {
                    k: config.k,
                    batch_size: config.batch_size.min(usable).max(1),
                    seed,
                    max_iter: 100,
                },
            )
        }
    }
}

pub fn fit_gmm(features: &Features, kmeans: &KMeansModel, config: &PipelineConfig) -> Result<GmmModel> {
    em_fit(
        &features.featurized.matrix,
        &GmmParams::new(config.k, derive_seed(config.seed, "gmm")),
        Some(kmeans),
    )
}

/// The features of a bundle's corpus under its stored vocabulary and idf.
pub fn bundle_features(bundle: &ModelBundle) -> Features {
    let tokens = tokenize_corpus(&bundle.reviews);
    let featurized = tfidf_with_idf(&tokens, &bundle.vocab, &bundle.idf);
    Features {
        tokens,
        vocab: bundle.vocab.clone(),
        featurized,
    }
}

pub fn fit_word_vectors(features: &Features, params: GloveParams, seed: u64) -> Result<WordVectors> {
    let cooc = build_cooccurrence(&features.tokens, &features.vocab, DEFAULT_WINDOW);
    train_glove(
        &cooc,
        &GloveParams {
            seed: derive_seed(seed, "glove"),
            ..params
        },
    )
}

/// Mini-batch k-means over the TF-IDF-weighted mean word vectors of the
/// reviews. Reviews without in-vocabulary tokens are left out of the fit.
pub fn fit_embedding_clusters(
    features: &Features,
    vectors: &WordVectors,
    k: usize,
    batch_size: usize,
    seed: u64,
) -> Result<KMeansModel> {
    let points = embed_corpus(&features.tokens, vectors, &features.vocab, &features.featurized.matrix);
    minibatch_kmeans_fit(
        &points,
        &MiniBatchParams {
            k,
            batch_size,
            seed: derive_seed(seed, "embedding-kmeans"),
            max_iter: 100,
        },
    )
}

/// Featurizes, clusters and optionally embeds `reviews`, returning a bundle.
/// Review ids must equal their positions.
pub fn fit_bundle(reviews: Vec<Review>, stopwords: StopwordSets, config: &PipelineConfig) -> Result<ModelBundle> {
    config.validate()?;
    if let Some(pos) = reviews.iter().enumerate().position(|(i, r)| r.id != i) {
        return Err(Error::invalid(
            "reviews",
            format!("review at position {pos} has id {}", reviews[pos].id),
        ));
    }
    log::info!("fitting {} reviews with {config:?}", reviews.len());
    let features = featurize_corpus(&reviews, &stopwords, config.min_df)?;
    let kmeans = fit_kmeans(&features, config)?;
    log::info!(
        "k-means sse {:.6} after {} iterations",
        kmeans.sse,
        kmeans.iterations_run
    );
    let gmm = fit_gmm(&features, &kmeans, config)?;
    log::info!(
        "em log-likelihood {:.6} after {} iterations",
        gmm.log_likelihood,
        gmm.iterations_run
    );
    let keyword_table = centroid_keywords(&gmm, &features.vocab, KEYWORDS_PER_CLUSTER);
    let word_vectors = config
        .glove
        .map(|p| fit_word_vectors(&features, p, config.seed))
        .transpose()?;
    Ok(ModelBundle {
        corpus_digest: corpus_digest(&reviews)?,
        reviews,
        stopwords,
        min_df: config.min_df,
        vocab: features.vocab,
        idf: features.featurized.idf,
        kmeans,
        gmm,
        keyword_table,
        word_vectors,
        defaults: config.recommender,
        fit_seed: config.seed,
    })
}
