use sommelier::embed::GloveParams;
use sommelier::featurize::StopwordSets;
use sommelier::pipeline::{
    bundle_features, featurize_corpus, fit_bundle, fit_embedding_clusters, fit_kmeans, KMeansAlgorithm, PipelineConfig,
};
use sommelier::service::{read_bundle, write_bundle, Model};
use sommelier::synth::{archetype_corpus, ARCHETYPE_POOLS};

/// Share of rows whose cluster's majority label equals their own label.
fn purity(assignments: &[usize], labels: &[usize], k: usize) -> f64 {
    let mut counts = vec![[0usize; ARCHETYPE_POOLS.len()]; k];
    for (&c, &l) in assignments.iter().zip(labels) {
        counts[c][l] += 1;
    }
    let majority: usize = counts.iter().map(|row| *row.iter().max().unwrap()).sum();
    majority as f64 / labels.len() as f64
}

#[test]
fn minibatch_start_recovers_archetypes() {
    let corpus = archetype_corpus(300, 21);
    let config = PipelineConfig {
        k: 6,
        seed: 5,
        algorithm: KMeansAlgorithm::MiniBatch,
        batch_size: 64,
        ..PipelineConfig::default()
    };
    let features = featurize_corpus(&corpus.reviews, &StopwordSets::default(), config.min_df).unwrap();
    let kmeans = fit_kmeans(&features, &config).unwrap();
    assert!(purity(&kmeans.assignments, &corpus.labels, 6) >= 0.95);
    let bundle = fit_bundle(corpus.reviews, StopwordSets::default(), &config).unwrap();
    assert_eq!(bundle.kmeans, kmeans);
    assert!(purity(&bundle.gmm.assignments, &corpus.labels, 6) >= 0.95);
}

#[test]
fn bundle_with_word_vectors_round_trips() {
    let corpus = archetype_corpus(200, 11);
    let config = PipelineConfig {
        k: 6,
        seed: 2,
        glove: Some(GloveParams {
            dim: 16,
            epochs: 20,
            ..GloveParams::default()
        }),
        ..PipelineConfig::default()
    };
    let bundle = fit_bundle(corpus.reviews, StopwordSets::default(), &config).unwrap();
    let vectors = bundle.word_vectors.as_ref().unwrap();
    assert_eq!(vectors.vocab_size, bundle.vocab.len());
    assert_eq!(vectors.epoch_losses.len(), 20);

    let mut raw = Vec::new();
    write_bundle(&bundle, &mut raw).unwrap();
    let loaded = read_bundle(raw.as_slice()).unwrap();
    assert_eq!(loaded, bundle);
    let model = Model::from_bundle(loaded).unwrap();
    assert_eq!(model.matrix(), &bundle_features(&bundle).featurized.matrix);

    let features = bundle_features(&bundle);
    let clusters = fit_embedding_clusters(&features, vectors, 6, 64, 3).unwrap();
    assert_eq!(clusters.assignments.len(), corpus.labels.len());
    assert!(purity(&clusters.assignments, &corpus.labels, 6) >= 0.8);
    assert_eq!(clusters, fit_embedding_clusters(&features, vectors, 6, 64, 3).unwrap());
}

#[test]
fn stage_seeds_are_independent() {
    let corpus = archetype_corpus(120, 4);
    let base = PipelineConfig {
        k: 6,
        seed: 9,
        ..PipelineConfig::default()
    };
    let with_glove = PipelineConfig {
        glove: Some(GloveParams {
            dim: 4,
            epochs: 2,
            ..GloveParams::default()
        }),
        ..base
    };
    let a = fit_bundle(corpus.reviews.clone(), StopwordSets::default(), &base).unwrap();
    let b = fit_bundle(corpus.reviews, StopwordSets::default(), &with_glove).unwrap();
    // Adding the embedding stage leaves the clustering streams untouched.
    assert_eq!(a.kmeans, b.kmeans);
    assert_eq!(a.gmm, b.gmm);
}

#[test]
fn positional_ids_are_required() {
    let mut reviews = archetype_corpus(20, 1).reviews;
    reviews.swap(3, 4);
    let config = PipelineConfig {
        k: 2,
        ..PipelineConfig::default()
    };
    assert!(fit_bundle(reviews, StopwordSets::default(), &config).is_err());
}
