use crate::corpus::Review;
use crate::matrix::FeatureMatrix;
use crate::pipeline::bundle_features;
use crate::recommend::{
    match_palates, recommend, recommend_cold_start, Catalog, RecommendationSet, RecommenderConfig, UserHistory,
};
use crate::seed::derive_seed;
use crate::Result;

use super::{ModelBundle, RecommendationView};

/// A loaded bundle with its TF-IDF matrix rebuilt, ready to recommend.
#[derive(Debug, Clone)]
pub struct Model {
    bundle: ModelBundle,
    digest: String,
    x: FeatureMatrix,
}

impl Model {
    pub fn from_bundle(bundle: ModelBundle) -> Result<Self> {
        bundle.validate()?;
        let x = bundle_features(&bundle).featurized.matrix;
        let digest = bundle.digest();
        Ok(Model { bundle, digest, x })
    }

    pub fn bundle(&self) -> &ModelBundle {
        &self.bundle
    }

    /// Payload digest of the bundle.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// A stable 64-bit value derived from the digest.
    pub fn digest_seed(&self) -> u64 {
        derive_seed(0, &self.digest)
    }

    pub fn matrix(&self) -> &FeatureMatrix {
        &self.x
    }

    pub fn reviews(&self) -> &[Review] {
        &self.bundle.reviews
    }

    pub fn keyword_table(&self) -> &[Vec<String>] {
        &self.bundle.keyword_table
    }

    pub fn catalog(&self) -> Catalog<'_> {
        Catalog {
            reviews: &self.bundle.reviews,
            x: &self.x,
            gmm: &self.bundle.gmm,
        }
    }

    /// The bundle's recommender defaults with `seed`.
    pub fn config(&self, seed: u64) -> RecommenderConfig {
        self.bundle.defaults.with_seed(seed)
    }

    /// One recommendation round. A history with a liked wine drives the
    /// preference path; otherwise questionnaire `targets` drive a cold start.
    /// Sessions and the command line both go through here, so a reported
    /// seed replays exactly.
    pub fn recommend_for(
        &self,
        history: &UserHistory,
        targets: Option<&[usize]>,
        config: &RecommenderConfig,
    ) -> Result<RecommendationSet> {
        history.validate(self.bundle.reviews.len())?;
        match targets {
            Some(t) if !history.has_liked() => recommend_cold_start(t, history, self.catalog(), config),
            _ => recommend(history, self.catalog(), config),
        }
    }

    /// Target clusters for questionnaire keywords.
    pub fn targets_for(&self, keywords: &[String]) -> Result<Vec<usize>> {
        match_palates(keywords, &self.bundle.keyword_table)
    }

    pub fn view(&self, set: &RecommendationSet) -> RecommendationView {
        RecommendationView::new(set, &self.bundle.reviews, &self.bundle.gmm.assignments)
    }
}
