//! Palate-driven recommendation.
//!
//! A round produces three bets and one wildcard. Each pick runs its own
//! sampling chain:
//!
//! 1. choose a cluster from the user's preference distribution (or, on cold
//!    start, one of the questionnaire's target clusters);
//! 2. take a liked history wine from it (or the cluster mean) and add
//!    per-dimension Gaussian noise scaled by the cluster's fitted spread;
//! 3. widen the search to the runner-up cluster when its responsibility for
//!    the benchmark is close to the top one;
//! 4. return the eligible wine in the search space with the lowest cost.
//!
//! The wildcard repeats the chain with a much broader noise scale.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cluster::{gmm_responsibilities, GmmModel};
use crate::corpus::Review;
use crate::featurize::VocabIndex;
use crate::matrix::{FeatureMatrix, Row};
use crate::seed::rng;
use crate::{Error, Result};

pub type WineId = usize;

/// Number of bets per round, alongside one wildcard.
pub const BETS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Liked,
    Disliked,
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "liked" | "like" => Ok(Verdict::Liked),
            "disliked" | "dislike" => Ok(Verdict::Disliked),
            other => Err(Error::invalid(
                "verdict",
                format!("expected liked|disliked, got {other:?}"),
            )),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Liked => "liked",
            Verdict::Disliked => "disliked",
        })
    }
}

/// A user's judged wines. Each wine appears once; re-judging updates the
/// verdict in place.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserHistory {
    entries: Vec<(WineId, Verdict)>,
}

impl UserHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (WineId, Verdict)>) -> Self {
        let mut h = Self::new();
        for (id, v) in entries {
            h.record(id, v);
        }
        h
    }

    /// Records a verdict; the latest verdict for a wine wins.
    pub fn record(&mut self, id: WineId, verdict: Verdict) {
        match self.entries.iter_mut().find(|(w, _)| *w == id) {
            Some(entry) => entry.1 = verdict,
            None => self.entries.push((id, verdict)),
        }
    }

    pub fn entries(&self) -> &[(WineId, Verdict)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: WineId) -> bool {
        self.entries.iter().any(|(w, _)| *w == id)
    }

    pub fn liked(&self) -> impl Iterator<Item = WineId> + '_ {
        self.with(Verdict::Liked)
    }

    pub fn disliked(&self) -> impl Iterator<Item = WineId> + '_ {
        self.with(Verdict::Disliked)
    }

    fn with(&self, verdict: Verdict) -> impl Iterator<Item = WineId> + '_ {
        self.entries.iter().filter(move |(_, v)| *v == verdict).map(|(w, _)| *w)
    }

    pub fn has_liked(&self) -> bool {
        self.liked().next().is_some()
    }

    /// Checks that every wine exists in a corpus of `corpus_len` wines.
    pub fn validate(&self, corpus_len: usize) -> Result<()> {
        match self.entries.iter().find(|(w, _)| *w >= corpus_len) {
            Some(&(w, _)) => Err(Error::UnknownWine(w)),
            None => Ok(()),
        }
    }

    /// Parses `wine_id,liked|disliked` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut h = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (id, verdict) = line
                .split_once(',')
                .ok_or_else(|| Error::invalid("history", format!("line {}: expected `id,verdict`", n + 1)))?;
            let id = id
                .trim()
                .parse::<WineId>()
                .map_err(|_| Error::invalid("history", format!("line {}: bad wine id {id:?}", n + 1)))?;
            h.record(id, verdict.parse()?);
        }
        Ok(h)
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().map(|(w, v)| format!("{w},{v}\n")).collect()
    }
}

/// Per-cluster preference terms and the resulting sampling distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPreference {
    /// Share of the user's liked wines in each cluster.
    pub x: Vec<f64>,
    /// History wines (liked or disliked) in each cluster.
    pub y: Vec<usize>,
    /// Share of the user's disliked wines in each cluster.
    pub z: Vec<f64>,
    pub p: Vec<f64>,
    /// The formula's normalizer was zero and `p` is uniform over clusters
    /// holding a liked wine.
    pub fallback: bool,
}

/// Cluster selection probabilities `p_k ∝ x_k · y_k · (1 − z_k)`, normalized
/// over clusters.
pub fn cluster_preferences(history: &UserHistory, assignments: &[usize], k: usize) -> Result<ClusterPreference> {
    history.validate(assignments.len())?;
    let liked: Vec<usize> = history.liked().map(|w| assignments[w]).collect();
    let disliked: Vec<usize> = history.disliked().map(|w| assignments[w]).collect();
    if liked.is_empty() {
        return Err(Error::ColdStartRequired);
    }
    let mut liked_n = vec![0usize; k];
    let mut disliked_n = vec![0usize; k];
    for &c in &liked {
        liked_n[c] += 1;
    }
    for &c in &disliked {
        disliked_n[c] += 1;
    }
    let x: Vec<f64> = liked_n.iter().map(|&n| n as f64 / liked.len() as f64).collect();
    let z: Vec<f64> = if disliked.is_empty() {
        vec![0.0; k]
    } else {
        disliked_n.iter().map(|&n| n as f64 / disliked.len() as f64).collect()
    };
    let y: Vec<usize> = liked_n.iter().zip(&disliked_n).map(|(a, b)| a + b).collect();

    let (p, fallback) = preference_from_terms(&x, &y, &z);
    Ok(ClusterPreference { x, y, z, p, fallback })
}

/// Normalizes `x_k · y_k · (1 − z_k)` over clusters. When every term is
/// zero the result is uniform over clusters with `x_k > 0` and the flag is set.
pub fn preference_from_terms(x: &[f64], y: &[usize], z: &[f64]) -> (Vec<f64>, bool) {
    let raw: Vec<f64> = x
        .iter()
        .zip(y)
        .zip(z)
        .map(|((x, &y), z)| x * y as f64 * (1.0 - z))
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        return (raw.iter().map(|r| r / total).collect(), false);
    }
    let support = x.iter().filter(|&&v| v > 0.0).count() as f64;
    (
        x.iter().map(|&v| if v > 0.0 { 1.0 / support } else { 0.0 }).collect(),
        true,
    )
}

/// Draws a cluster id with probability `p_k`.
pub fn sample_cluster<R: Rng + ?Sized>(pref: &ClusterPreference, rng: &mut R) -> usize {
    WeightedIndex::new(&pref.p)
        .expect("preference is a probability vector")
        .sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostOrientation {
    /// `price / quality + λ·distance`: cheaper wine per point is better.
    #[default]
    PricePerPoint,
    /// `quality / price + λ·distance`, minimized exactly as written.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommenderConfig {
    pub lambda: f64,
    pub noise_scale: f64,
    pub wildcard_scale: f64,
    pub expansion_ratio: f64,
    pub seed: u64,
    #[serde(default)]
    pub orientation: CostOrientation,
}

impl Default for RecommenderConfig {
    fn default() -> Self {
        RecommenderConfig {
            lambda: 1.0,
            noise_scale: 0.1,
            wildcard_scale: 1.0,
            expansion_ratio: 0.8,
            seed: 0,
            orientation: CostOrientation::PricePerPoint,
        }
    }
}

impl RecommenderConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        RecommenderConfig { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid("lambda", "must be finite and >= 0"));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::invalid("noise_scale", "must be finite and >= 0"));
        }
        if !(self.wildcard_scale.is_finite() && self.wildcard_scale > self.noise_scale) {
            return Err(Error::invalid("wildcard_scale", "must exceed noise_scale"));
        }
        if !(self.expansion_ratio > 0.0 && self.expansion_ratio <= 1.0) {
            return Err(Error::invalid("expansion_ratio", "must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BenchmarkSource {
    HistoryWine { wine_id: WineId },
    Centroid { cluster: usize },
}

/// Everything needed to rebuild a benchmark coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkProvenance {
    pub source: BenchmarkSource,
    /// Cluster whose spread scales the noise.
    pub cluster: usize,
    pub scale: f64,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub coords: Vec<f64>,
    pub provenance: BenchmarkProvenance,
}

/// Adds independent Gaussian noise with standard deviation
/// `scale · sqrt(variances[j])` to each coordinate and clamps at zero.
pub fn perturb(mut base: Vec<f64>, variances: &[f64], scale: f64, noise_seed: u64) -> Vec<f64> {
    if scale > 0.0 {
        let mut gen = rng(noise_seed);
        for (b, v) in base.iter_mut().zip(variances) {
            let z: f64 = gen.sample(StandardNormal);
            *b += scale * v.sqrt() * z;
        }
    }
    for b in &mut base {
        if *b < 0.0 {
            *b = 0.0;
        }
    }
    base
}

/// Rebuilds a benchmark coordinate from its provenance.
pub fn regenerate_benchmark(prov: &BenchmarkProvenance, x: &FeatureMatrix, gmm: &GmmModel) -> Vec<f64> {
    let base = match prov.source {
        BenchmarkSource::HistoryWine { wine_id } => x.row_dense(wine_id),
        BenchmarkSource::Centroid { cluster } => gmm.means[cluster].clone(),
    };
    perturb(base, &gmm.variances[prov.cluster], prov.scale, prov.noise_seed)
}

/// Picks a liked history wine in `cluster` uniformly at random and perturbs
/// its row with noise shaped by the cluster's variances.
pub fn sample_benchmark<R: Rng + ?Sized>(
    cluster: usize,
    history: &UserHistory,
    x: &FeatureMatrix,
    gmm: &GmmModel,
    scale: f64,
    rng: &mut R,
) -> Result<Benchmark> {
    let pool: Vec<WineId> = history
        .liked()
        .filter(|&w| gmm.assignments.get(w) == Some(&cluster))
        .collect();
    if pool.is_empty() {
        return Err(Error::NoLikedWineInCluster(cluster));
    }
    let wine_id = pool[rng.random_range(0..pool.len())];
    let provenance = BenchmarkProvenance {
        source: BenchmarkSource::HistoryWine { wine_id },
        cluster,
        scale,
        noise_seed: rng.next_u64(),
    };
    Ok(Benchmark {
        coords: regenerate_benchmark(&provenance, x, gmm),
        provenance,
    })
}

/// The most responsible cluster, plus the runner-up when its responsibility
/// is at least `ratio` times the top one.
pub fn expand_search_space(gmm: &GmmModel, benchmark: &[f64], ratio: f64) -> Vec<usize> {
    expand_from_responsibilities(&gmm_responsibilities(gmm, benchmark), ratio)
}

pub fn expand_from_responsibilities(resp: &[f64], ratio: f64) -> Vec<usize> {
    let order = ranked(resp);
    let mut space = vec![order[0]];
    if let Some(&second) = order.get(1) {
        if resp[order[0]] > 0.0 && resp[second] / resp[order[0]] >= ratio {
            space.push(second);
        }
    }
    space
}

/// Cluster ids by descending responsibility, ties to the lower id.
fn ranked(resp: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..resp.len()).collect();
    order.sort_by(|&a, &b| resp[b].total_cmp(&resp[a]).then(a.cmp(&b)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Price/quality term.
    pub value_term: f64,
    /// Euclidean distance to the benchmark.
    pub distance: f64,
    /// `λ · distance`.
    pub distance_term: f64,
    pub total: f64,
}

/// Cost of recommending `wine` against a benchmark; lower is better.
pub fn score_candidate(
    benchmark: &[f64],
    wine: &Review,
    row: Row<'_>,
    lambda: f64,
    orientation: CostOrientation,
) -> Result<CostBreakdown> {
    let price = wine.price.ok_or(Error::MissingPrice(wine.id))?.as_f64();
    let quality = wine.score as f64;
    let value_term = match orientation {
        CostOrientation::PricePerPoint => price / quality,
        CostOrientation::Literal => quality / price,
    };
    let distance = row.sq_dist_exact(benchmark).sqrt();
    let distance_term = lambda * distance;
    Ok(CostBreakdown {
        value_term,
        distance,
        distance_term,
        total: value_term + distance_term,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PickKind {
    Bet,
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pick {
    pub wine_id: WineId,
    pub kind: PickKind,
    pub cost: CostBreakdown,
    /// Clusters searched for this pick.
    pub search_space: Vec<usize>,
    pub benchmark: BenchmarkProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationSet {
    pub bets: Vec<Pick>,
    pub wildcard: Pick,
    pub seed: u64,
}

impl RecommendationSet {
    pub fn picks(&self) -> impl Iterator<Item = &Pick> {
        self.bets.iter().chain(std::iter::once(&self.wildcard))
    }

    pub fn wine_ids(&self) -> Vec<WineId> {
        self.picks().map(|p| p.wine_id).collect()
    }
}

/// The fitted model and corpus a recommendation draws from.
#[derive(Debug, Clone, Copy)]
pub struct Catalog<'a> {
    pub reviews: &'a [Review],
    pub x: &'a FeatureMatrix,
    pub gmm: &'a GmmModel,
}

impl<'a> Catalog<'a> {
    /// Wines that may be recommended: priced, nonempty row, not in `history`.
    pub fn eligible(&self, history: &UserHistory) -> Vec<bool> {
        let mut ok: Vec<bool> = self
            .reviews
            .iter()
            .map(|r| r.price.is_some() && !self.x.is_empty_row(r.id))
            .collect();
        for &(w, _) in history.entries() {
            if let Some(slot) = ok.get_mut(w) {
                *slot = false;
            }
        }
        ok
    }

    /// Lowest-cost eligible wine in `space`, ties to the lowest id.
    pub fn best_in(
        &self,
        space: &[usize],
        benchmark: &[f64],
        eligible: &[bool],
        config: &RecommenderConfig,
    ) -> Result<Option<(WineId, CostBreakdown)>> {
        let mut best: Option<(WineId, CostBreakdown)> = None;
        for (id, &c) in self.gmm.assignments.iter().enumerate() {
            if !eligible[id] || !space.contains(&c) {
                continue;
            }
            let cost = score_candidate(
                benchmark,
                &self.reviews[id],
                crate::matrix::Points::row(self.x, id),
                config.lambda,
                config.orientation,
            )?;
            if best.as_ref().is_none_or(|(_, b)| cost.total < b.total) {
                best = Some((id, cost));
            }
        }
        Ok(best)
    }

    fn check(&self) -> Result<()> {
        if self.reviews.len() != self.x.rows() || self.gmm.assignments.len() != self.x.rows() {
            return Err(Error::invalid("catalog", "corpus, matrix and model sizes differ"));
        }
        Ok(())
    }
}

/// Recommends from a history with at least one liked wine.
pub fn recommend(history: &UserHistory, catalog: Catalog<'_>, config: &RecommenderConfig) -> Result<RecommendationSet> {
    catalog.check()?;
    let pref = cluster_preferences(history, &catalog.gmm.assignments, catalog.gmm.k)?;
    assemble(catalog, history, config, |scale, gen| {
        let cluster = sample_cluster(&pref, gen);
        sample_benchmark(cluster, history, catalog.x, catalog.gmm, scale, gen)
    })
}

/// Recommends around the means of questionnaire target clusters. History
/// wines, if any, are still excluded.
pub fn recommend_cold_start(
    targets: &[usize],
    history: &UserHistory,
    catalog: Catalog<'_>,
    config: &RecommenderConfig,
) -> Result<RecommendationSet> {
    catalog.check()?;
    history.validate(catalog.reviews.len())?;
    if targets.is_empty() || targets.iter().any(|&t| t >= catalog.gmm.k) {
        return Err(Error::invalid("targets", "need at least one valid target cluster"));
    }
    assemble(catalog, history, config, |scale, gen| {
        Ok(centroid_benchmark(targets, catalog.gmm, scale, gen))
    })
}

fn centroid_benchmark<R: Rng + ?Sized>(targets: &[usize], gmm: &GmmModel, scale: f64, gen: &mut R) -> Benchmark {
    let cluster = targets[gen.random_range(0..targets.len())];
    let provenance = BenchmarkProvenance {
        source: BenchmarkSource::Centroid { cluster },
        cluster,
        scale,
        noise_seed: gen.next_u64(),
    };
    Benchmark {
        coords: perturb(
            gmm.means[cluster].clone(),
            &gmm.variances[cluster],
            scale,
            provenance.noise_seed,
        ),
        provenance,
    }
}

fn assemble<F>(
    catalog: Catalog<'_>,
    history: &UserHistory,
    config: &RecommenderConfig,
    mut draw: F,
) -> Result<RecommendationSet>
where
    F: FnMut(f64, &mut rand_chacha::ChaCha8Rng) -> Result<Benchmark>,
{
    config.validate()?;
    let mut eligible = catalog.eligible(history);
    let available = eligible.iter().filter(|&&e| e).count();
    if available < BETS + 1 {
        return Err(Error::InsufficientCandidates { available });
    }
    let mut gen = rng(config.seed);
    let mut picks = Vec::with_capacity(BETS + 1);
    for slot in 0..=BETS {
        let (kind, scale) = if slot < BETS {
            (PickKind::Bet, config.noise_scale)
        } else {
            (PickKind::Wildcard, config.wildcard_scale)
        };
        let bench = draw(scale, &mut gen)?;
        let resp = gmm_responsibilities(catalog.gmm, &bench.coords);
        let mut space = expand_from_responsibilities(&resp, config.expansion_ratio);
        // An exhausted search space grows by responsibility rank.
        let mut widen = ranked(&resp).into_iter();
        let (wine_id, cost) = loop {
            if let Some(found) = catalog.best_in(&space, &bench.coords, &eligible, config)? {
                break found;
            }
            let next = widen
                .find(|c| !space.contains(c))
                .expect("eligible wines remain in some cluster");
            space.push(next);
        };
        eligible[wine_id] = false;
        picks.push(Pick {
            wine_id,
            kind,
            cost,
            search_space: space,
            benchmark: bench.provenance,
        });
    }
    let wildcard = picks.pop().expect("four picks");
    Ok(RecommendationSet {
        bets: picks,
        wildcard,
        seed: config.seed,
    })
}

/// Clusters whose keyword lists match the most questionnaire keywords.
pub fn match_palates(keywords: &[String], keyword_table: &[Vec<String>]) -> Result<Vec<usize>> {
    let mut wanted: Vec<String> = keywords.iter().map(|k| k.trim().to_lowercase()).collect();
    wanted.sort();
    wanted.dedup();
    if wanted.iter().all(String::is_empty) {
        return Err(Error::invalid("keywords", "no keywords given"));
    }
    let scores: Vec<usize> = keyword_table
        .iter()
        .map(|list| wanted.iter().filter(|w| list.contains(w)).count())
        .collect();
    let best = scores.iter().copied().max().unwrap_or(0);
    if best == 0 {
        return Err(Error::NoMatchingPalate);
    }
    Ok((0..scores.len()).filter(|&c| scores[c] == best).collect())
}

/// Target clusters for questionnaire keywords, and a benchmark at the mean
/// of one target drawn uniformly.
pub fn cold_start_targets<R: Rng + ?Sized>(
    keywords: &[String],
    keyword_table: &[Vec<String>],
    gmm: &GmmModel,
    rng: &mut R,
) -> Result<(Vec<usize>, Benchmark)> {
    let targets = match_palates(keywords, keyword_table)?;
    let bench = centroid_benchmark(&targets, gmm, 0.0, rng);
    Ok((targets, bench))
}

/// A liked history built from the `per_keyword` wines with the highest
/// TF-IDF weight for each keyword. Unknown keywords are skipped and returned.
pub fn artificial_history(
    keywords: &[String],
    x: &FeatureMatrix,
    vocab: &VocabIndex,
    per_keyword: usize,
) -> Result<(UserHistory, Vec<String>)> {
    let mut history = UserHistory::new();
    let mut skipped = Vec::new();
    for kw in keywords {
        let token = kw.trim().to_lowercase();
        let Some(j) = vocab.column(&token) else {
            log::warn!("keyword {token:?} is not in the vocabulary; skipped");
            skipped.push(token);
            continue;
        };
        let mut col = x.column(j);
        col.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (id, _) in col.into_iter().take(per_keyword) {
            history.record(id, Verdict::Liked);
        }
    }
    if skipped.len() == keywords.len() {
        return Err(Error::NoKnownKeywords);
    }
    Ok((history, skipped))
}
