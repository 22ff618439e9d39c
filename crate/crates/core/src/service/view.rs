use serde::{Deserialize, Serialize};

use crate::corpus::Review;
use crate::recommend::{BenchmarkProvenance, CostBreakdown, Pick, PickKind, RecommendationSet, WineId};

/// The wine fields shown on a recommendation card.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WineSummary {
    pub wine_id: WineId,
    pub name: String,
    pub winery: String,
    pub country: String,
    pub region: String,
    pub vintage: Option<i32>,
    /// Price in dollars.
    pub price: Option<f64>,
    pub score: u32,
}

impl From<&Review> for WineSummary {
    fn from(r: &Review) -> Self {
        WineSummary {
            wine_id: r.id,
            name: r.name.clone(),
            winery: r.winery.clone(),
            country: r.country.clone(),
            region: r.region.clone(),
            vintage: r.vintage,
            price: r.price.map(|p| p.as_f64()),
            score: r.score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PickView {
    #[serde(flatten)]
    pub wine: WineSummary,
    pub kind: PickKind,
    /// Component the wine belongs to.
    pub cluster: usize,
    pub cost: CostBreakdown,
    pub search_space: Vec<usize>,
    pub benchmark: BenchmarkProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationView {
    pub bets: Vec<PickView>,
    pub wildcard: PickView,
    pub seed: u64,
}

impl RecommendationView {
    pub fn new(set: &RecommendationSet, reviews: &[Review], assignments: &[usize]) -> Self {
        let pick = |p: &Pick| PickView {
            wine: WineSummary::from(&reviews[p.wine_id]),
            kind: p.kind,
            cluster: assignments[p.wine_id],
            cost: p.cost,
            search_space: p.search_space.clone(),
            benchmark: p.benchmark,
        };
        RecommendationView {
            bets: set.bets.iter().map(pick).collect(),
            wildcard: pick(&set.wildcard),
            seed: set.seed,
        }
    }
}
