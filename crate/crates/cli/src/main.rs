//! `sommelier`: fit, inspect and serve the wine recommender.

mod report;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sommelier::cluster::{centroid_keywords, elbow_scan, DEFAULT_ELBOW_THRESHOLD};
use sommelier::corpus::{parse_reviews_with_threshold, write_reviews, Ingested, DEFAULT_SCORE_THRESHOLD};
use sommelier::embed::{cosine, GloveParams, WordVectors};
use sommelier::featurize::{discover_domain_stopwords, DiscoveryParams, StopwordSets, VocabIndex, DEFAULT_MIN_DF};
use sommelier::pipeline::{
    bundle_features, featurize_corpus, fit_bundle, fit_embedding_clusters, fit_gmm, fit_kmeans, fit_word_vectors,
    Features, KMeansAlgorithm, PipelineConfig, DEFAULT_K,
};
use sommelier::recommend::{artificial_history, CostOrientation, RecommenderConfig, UserHistory};
use sommelier::service::{load_bundle, save_bundle, Model, ModelBundle, SessionManager};
use sommelier::synth::archetype_corpus;

use report::Report;

#[derive(Debug, Parser)]
#[command(
    name = "sommelier",
    version,
    about = "Content-based wine recommendation from review texts"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Output::Table)]
    output: Output,

    /// Seed for every random stage; stages derive their own sub-seeds from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Record,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect or generate review corpora.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Build the vocabulary and TF-IDF matrix and report on them.
    Featurize(FeaturizeArgs),
    /// Fit clusterings, scan cluster counts, list cluster keywords.
    #[command(subcommand)]
    Cluster(ClusterCommand),
    /// Train word vectors.
    #[command(subcommand)]
    Embed(EmbedCommand),
    /// Recommend three bets and a wildcard from a history or questionnaire keywords.
    Recommend(RecommendArgs),
    /// Show questionnaire matching and a cold-start round.
    Coldstart(ColdstartArgs),
    /// Serve the session API.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Count read, rejected and retained records.
    Stats(CorpusArgs),
    /// Write a synthetic six-archetype corpus.
    Synth {
        #[arg(long, default_value_t = 600)]
        reviews: usize,
        /// Destination file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
struct CorpusArgs {
    /// Newline-delimited review records.
    #[arg(long)]
    corpus: PathBuf,
    /// Minimum score retained.
    #[arg(long, default_value_t = DEFAULT_SCORE_THRESHOLD)]
    min_score: u32,
}

#[derive(Debug, Clone, Args)]
struct FeatureArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, default_value_t = DEFAULT_MIN_DF)]
    min_df: usize,
    /// Generic stopword list replacing the built-in English list.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Domain stopword list replacing the built-in one.
    #[arg(long)]
    domain_stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    #[command(flatten)]
    features: FeatureArgs,
    /// Also propose domain stopwords from repeated clusterings.
    #[arg(long)]
    discover: bool,
    #[arg(long, default_value_t = 3)]
    runs: usize,
    #[arg(long, default_value_t = 8)]
    discover_k: usize,
    #[arg(long, default_value_t = 25)]
    top: usize,
    #[arg(long, default_value_t = 0.75)]
    fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Kmeans,
    Minibatch,
    Gmm,
}

#[derive(Debug, Clone, Args)]
struct RecommenderArgs {
    /// Weight of the distance term.
    #[arg(long)]
    lambda: Option<f64>,
    /// Benchmark noise scale for bets.
    #[arg(long)]
    noise_scale: Option<f64>,
    /// Benchmark noise scale for the wildcard.
    #[arg(long)]
    wildcard_scale: Option<f64>,
    /// Runner-up/top responsibility ratio that widens the search.
    #[arg(long)]
    expansion_ratio: Option<f64>,
    /// Minimize quality/price instead of price/quality.
    #[arg(long)]
    literal_cost: bool,
}

impl RecommenderArgs {
    fn apply(&self, base: RecommenderConfig) -> RecommenderConfig {
        RecommenderConfig {
            lambda: self.lambda.unwrap_or(base.lambda),
            noise_scale: self.noise_scale.unwrap_or(base.noise_scale),
            wildcard_scale: self.wildcard_scale.unwrap_or(base.wildcard_scale),
            expansion_ratio: self.expansion_ratio.unwrap_or(base.expansion_ratio),
            orientation: if self.literal_cost {
                CostOrientation::Literal
            } else {
                base.orientation
            },
            ..base
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    features: FeatureArgs,
    #[arg(long, value_enum, default_value_t = Algo::Gmm)]
    algo: Algo,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// k-means restarts (best SSE kept).
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    /// Write a model bundle here. The mixture is always fitted for a bundle;
    /// `--algo minibatch` selects how its k-means start is fitted.
    #[arg(long)]
    bundle: Option<PathBuf>,
    /// Recommender defaults stored in the bundle.
    #[command(flatten)]
    recommender: RecommenderArgs,
}

#[derive(Debug, Subcommand)]
enum ClusterCommand {
    /// Fit k-means, mini-batch k-means or a Gaussian mixture.
    Fit(FitArgs),
    /// Best-of-restarts SSE for each k, as a two-column table.
    Elbow {
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2, 4, 8, 16, 24, 32, 40, 48, 64])]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        restarts: usize,
        /// Relative SSE drop below which the scan reports an elbow.
        #[arg(long, default_value_t = DEFAULT_ELBOW_THRESHOLD)]
        drop_threshold: f64,
    },
    /// Top centroid keywords of every mixture component in a bundle.
    Keywords {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

#[derive(Debug, Subcommand)]
enum EmbedCommand {
    /// Train GloVe vectors on a bundle's corpus and store them in the bundle.
    Train {
        #[arg(long)]
        bundle: PathBuf,
        /// Write the updated bundle here instead of in place.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 25)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        rate: f64,
        #[arg(long, default_value_t = 100.0)]
        x_max: f64,
        #[arg(long, default_value_t = 0.75)]
        alpha: f64,
    },
    /// Mini-batch k-means over review embeddings built from the bundle's vectors.
    Cluster {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value_t = 12)]
        k: usize,
        /// Capped at the number of embedded reviews.
        #[arg(long, default_value_t = 256)]
        batch_size: usize,
        /// Words nearest each centroid to list.
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
    /// Nearest words by cosine similarity of the bundle's vectors.
    Neighbors {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).multiple(true).args(["history", "keywords"])))]
struct RecommendArgs {
    #[arg(long)]
    bundle: PathBuf,
    /// History file of `wine_id,liked|disliked` lines.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Questionnaire keywords, used while the history has no liked wine.
    #[arg(long, value_delimiter = ',')]
    keywords: Option<Vec<String>>,
    #[command(flatten)]
    recommender: RecommenderArgs,
}

#[derive(Debug, Args)]
struct ColdstartArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    keywords: Vec<String>,
    /// Build a liked history from each keyword's top TF-IDF wines instead of
    /// sampling target cluster means.
    #[arg(long)]
    artificial_history: bool,
    #[arg(long, default_value_t = 5)]
    per_keyword: usize,
    #[command(flatten)]
    recommender: RecommenderArgs,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    bundle: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    /// Directory of static web assets served outside `/api`.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    /// Session snapshot, loaded at start if present and written at shutdown.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    log::info!("seed {} config {:?}", cli.seed, cli.command);
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: &Cli) -> Result<()> {
    let out = Report::new(cli.output);
    match &cli.command {
        Command::Corpus(CorpusCommand::Stats(args)) => {
            let ing = ingest(args)?;
            for d in &ing.diagnostics {
                log::debug!("line {}: {}", d.line, d.reason);
            }
            out.line(&ing.stats, |s| s.to_string())
        }
        Command::Corpus(CorpusCommand::Synth { reviews, out: dest }) => {
            let corpus = archetype_corpus(*reviews, cli.seed);
            match dest {
                Some(p) => write_reviews(&corpus.reviews, io::BufWriter::new(File::create(p)?))?,
                None => write_reviews(&corpus.reviews, io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Featurize(args) => featurize(args, cli.seed, &out),
        Command::Cluster(ClusterCommand::Fit(args)) => cluster_fit(args, cli.seed, &out),
        Command::Cluster(ClusterCommand::Elbow {
            features,
            ks,
            restarts,
            drop_threshold,
        }) => {
            let (_, f) = load_features(features)?;
            let curve = elbow_scan(&f.featurized.matrix, ks, cli.seed, *restarts, *drop_threshold)?;
            match curve.chosen_k {
                Some(k) => log::info!("elbow at k = {k}"),
                None => log::info!("no drop below {drop_threshold}"),
            }
            out.block(&curve, |c| c.to_table())
        }
        Command::Cluster(ClusterCommand::Keywords { bundle, top }) => {
            let b = load_bundle(bundle)?;
            let table = centroid_keywords(&b.gmm, &b.vocab, *top);
            out.block(&table, |t| report::keyword_table(t))
        }
        Command::Embed(EmbedCommand::Train {
            bundle,
            out: dest,
            dim,
            epochs,
            rate,
            x_max,
            alpha,
        }) => {
            let mut b = load_bundle(bundle)?;
            let features = bundle_features(&b);
            let params = GloveParams {
                dim: *dim,
                epochs: *epochs,
                rate: *rate,
                x_max: *x_max,
                alpha: *alpha,
                seed: 0,
            };
            let vectors = fit_word_vectors(&features, params, cli.seed)?;
            let table = vectors.loss_table();
            let losses = vectors.epoch_losses.clone();
            b.word_vectors = Some(vectors);
            save_bundle(&b, dest.as_ref().unwrap_or(bundle))?;
            out.block(&losses, |_| table.clone())
        }
        Command::Embed(EmbedCommand::Cluster {
            bundle,
            k,
            batch_size,
            top,
        }) => {
            let b = load_bundle(bundle)?;
            let vectors = trained_vectors(&b)?;
            let features = bundle_features(&b);
            let embedded = features.featurized.matrix.rows() - features.featurized.empty_rows.len();
            let model = fit_embedding_clusters(&features, vectors, *k, (*batch_size).min(embedded), cli.seed)?;
            let clusters: Vec<EmbeddingCluster> = model
                .centroids
                .iter()
                .zip(model.cluster_sizes())
                .enumerate()
                .map(|(cluster, (c, size))| EmbeddingCluster {
                    cluster,
                    size,
                    nearest_words: nearest_words(&b.vocab, vectors, c, None, *top)
                        .into_iter()
                        .map(|(w, _)| w)
                        .collect(),
                })
                .collect();
            log::info!("embedding clusters sse {:.6}", model.sse);
            out.block(&clusters, |cs| {
                let mut t = String::from("cluster\tsize\tnearest_words\n");
                for c in cs {
                    t.push_str(&format!("{}\t{}\t{}\n", c.cluster, c.size, c.nearest_words.join(", ")));
                }
                t
            })
        }
        Command::Embed(EmbedCommand::Neighbors { bundle, word, top }) => {
            let b = load_bundle(bundle)?;
            let vectors = trained_vectors(&b)?;
            let j = b
                .vocab
                .column(&word.to_lowercase())
                .with_context(|| format!("{word:?} is not in the vocabulary"))?;
            let scored = nearest_words(&b.vocab, vectors, &vectors.vector(j), Some(j), *top);
            out.block(&scored, |s| report::two_columns("word", "cosine", s))
        }
        Command::Recommend(args) => recommend(args, cli.seed, &out),
        Command::Coldstart(args) => coldstart(args, cli.seed, &out),
        Command::Serve(args) => serve(args),
    }
}

fn trained_vectors(b: &ModelBundle) -> Result<&WordVectors> {
    b.word_vectors
        .as_ref()
        .context("bundle has no word vectors; run `embed train`")
}

/// Vocabulary words by descending cosine similarity to `target`.
fn nearest_words(
    vocab: &VocabIndex,
    vectors: &WordVectors,
    target: &[f64],
    skip: Option<usize>,
    top: usize,
) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = (0..vocab.len())
        .filter(|&i| Some(i) != skip)
        .map(|i| (vocab.term(i).to_owned(), cosine(target, &vectors.vector(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(top);
    scored
}

#[derive(Serialize)]
struct EmbeddingCluster {
    cluster: usize,
    size: usize,
    nearest_words: Vec<String>,
}

fn ingest(args: &CorpusArgs) -> Result<Ingested> {
    let file = File::open(&args.corpus).with_context(|| format!("opening {}", args.corpus.display()))?;
    let ing = parse_reviews_with_threshold(BufReader::new(file), args.min_score)?;
    log::info!("{}", ing.stats);
    Ok(ing)
}

fn load_features(args: &FeatureArgs) -> Result<(Ingested, Features)> {
    let ing = ingest(&args.corpus)?;
    let stops = StopwordSets::load(args.stopwords.as_deref(), args.domain_stopwords.as_deref())?;
    let f = featurize_corpus(&ing.reviews, &stops, args.min_df)?;
    Ok((ing, f))
}

#[derive(Serialize)]
struct FeatureSummary {
    documents: usize,
    vocabulary: usize,
    nonzeros: usize,
    empty_rows: Vec<usize>,
    stopword_candidates: Option<Vec<sommelier::featurize::StopwordCandidate>>,
}

fn featurize(args: &FeaturizeArgs, seed: u64, out: &Report) -> Result<()> {
    let (_, f) = load_features(&args.features)?;
    let x = &f.featurized.matrix;
    let candidates = if args.discover {
        let params = DiscoveryParams {
            runs: args.runs,
            k: args.discover_k,
            top: args.top,
            fraction: args.fraction,
            seed,
        };
        Some(discover_domain_stopwords(x, &f.vocab, params)?)
    } else {
        None
    };
    let summary = FeatureSummary {
        documents: x.rows(),
        vocabulary: f.vocab.len(),
        nonzeros: x.nnz(),
        empty_rows: f.featurized.empty_rows.clone(),
        stopword_candidates: candidates,
    };
    out.block(&summary, |s| {
        let mut t = format!(
            "documents\t{}\nvocabulary\t{}\nnonzeros\t{}\nempty_rows\t{}\n",
            s.documents,
            s.vocabulary,
            s.nonzeros,
            s.empty_rows.len()
        );
        if let Some(c) = &s.stopword_candidates {
            t.push_str("\ncandidate\tfraction\n");
            for cand in c {
                t.push_str(&format!("{}\t{:.3}\n", cand.token, cand.fraction));
            }
        }
        t
    })
}

#[derive(Serialize)]
pub(crate) struct FitSummary {
    algo: &'static str,
    k: usize,
    seed: u64,
    objective: &'static str,
    value: f64,
    iterations: usize,
    cluster_sizes: Vec<usize>,
    keywords: Vec<Vec<String>>,
    bundle_digest: Option<String>,
}

fn cluster_fit(args: &FitArgs, seed: u64, out: &Report) -> Result<()> {
    let stops = StopwordSets::load(
        args.features.stopwords.as_deref(),
        args.features.domain_stopwords.as_deref(),
    )?;
    let ing = ingest(&args.features.corpus)?;
    let config = PipelineConfig {
        k: args.k,
        seed,
        min_df: args.features.min_df,
        restarts: args.restarts,
        algorithm: if args.algo == Algo::Minibatch {
            KMeansAlgorithm::MiniBatch
        } else {
            KMeansAlgorithm::Lloyd
        },
        batch_size: args.batch_size,
        glove: None,
        recommender: args.recommender.apply(RecommenderConfig::default()),
    };
    config.validate()?;
    log::info!("pipeline config {config:?}");

    let summary = if let Some(path) = &args.bundle {
        let bundle = fit_bundle(ing.reviews, stops, &config)?;
        save_bundle(&bundle, path)?;
        log::info!("wrote bundle {}", path.display());
        let digest = bundle.digest();
        summarize(
            args.algo,
            &config,
            &bundle.kmeans,
            Some(&bundle.gmm),
            &bundle.vocab,
            Some(digest),
        )
    } else {
        let features = featurize_corpus(&ing.reviews, &stops, config.min_df)?;
        let kmeans = fit_kmeans(&features, &config)?;
        let gmm = match args.algo {
            Algo::Gmm => Some(fit_gmm(&features, &kmeans, &config)?),
            _ => None,
        };
        summarize(args.algo, &config, &kmeans, gmm.as_ref(), &features.vocab, None)
    };
    out.block(&summary, report::fit_summary)
}

fn summarize(
    algo: Algo,
    config: &PipelineConfig,
    kmeans: &sommelier::cluster::KMeansModel,
    gmm: Option<&sommelier::cluster::GmmModel>,
    vocab: &VocabIndex,
    bundle_digest: Option<String>,
) -> FitSummary {
    let name = match algo {
        Algo::Kmeans => "kmeans",
        Algo::Minibatch => "minibatch",
        Algo::Gmm => "gmm",
    };
    match (algo, gmm) {
        (Algo::Gmm, Some(g)) => {
            let mut sizes = vec![0; g.k];
            for &a in &g.assignments {
                sizes[a] += 1;
            }
            FitSummary {
                algo: name,
                k: g.k,
                seed: config.seed,
                objective: "log_likelihood",
                value: g.log_likelihood,
                iterations: g.iterations_run,
                cluster_sizes: sizes,
                keywords: centroid_keywords(g, vocab, 10),
                bundle_digest,
            }
        }
        _ => FitSummary {
            algo: name,
            k: kmeans.k,
            seed: config.seed,
            objective: "sse",
            value: kmeans.sse,
            iterations: kmeans.iterations_run,
            cluster_sizes: kmeans.cluster_sizes(),
            keywords: centroid_keywords(kmeans, vocab, 10),
            bundle_digest,
        },
    }
}

fn load_model(path: &Path) -> Result<Model> {
    let bundle = load_bundle(path).with_context(|| format!("loading bundle {}", path.display()))?;
    Ok(Model::from_bundle(bundle)?)
}

fn recommend(args: &RecommendArgs, seed: u64, out: &Report) -> Result<()> {
    let model = load_model(&args.bundle)?;
    let history = match &args.history {
        Some(p) => {
            UserHistory::parse(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?
        }
        None => UserHistory::new(),
    };
    let targets = match &args.keywords {
        Some(k) => Some(model.targets_for(k)?),
        None => None,
    };
    let config = args.recommender.apply(model.config(seed));
    log::info!("recommender config {config:?}");
    let set = model.recommend_for(&history, targets.as_deref(), &config)?;
    out.block(&model.view(&set), report::recommendations)
}

#[derive(Serialize)]
struct ColdStart {
    target_clusters: Vec<usize>,
    skipped_keywords: Vec<String>,
    recommendations: sommelier::service::RecommendationView,
}

fn coldstart(args: &ColdstartArgs, seed: u64, out: &Report) -> Result<()> {
    let model = load_model(&args.bundle)?;
    let config = args.recommender.apply(model.config(seed));
    log::info!("recommender config {config:?}");
    let targets = model.targets_for(&args.keywords)?;
    let (set, skipped) = if args.artificial_history {
        let (history, skipped) =
            artificial_history(&args.keywords, model.matrix(), &model.bundle().vocab, args.per_keyword)?;
        (model.recommend_for(&history, None, &config)?, skipped)
    } else {
        (
            model.recommend_for(&UserHistory::new(), Some(&targets), &config)?,
            Vec::new(),
        )
    };
    let report = ColdStart {
        target_clusters: targets,
        skipped_keywords: skipped,
        recommendations: model.view(&set),
    };
    out.block(&report, |r| {
        let list: Vec<String> = r.target_clusters.iter().map(usize::to_string).collect();
        format!(
            "targets\t{}\n{}",
            list.join(","),
            report::recommendations(&r.recommendations)
        )
    })
}

fn serve(args: &ServeArgs) -> Result<()> {
    let model = Arc::new(load_model(&args.bundle)?);
    let sessions = match &args.snapshot {
        Some(p) if p.exists() => SessionManager::load_snapshot(model, p)?,
        _ => SessionManager::new(model),
    };
    let sessions = Arc::new(sessions);
    let addr = SocketAddr::new(args.host, args.port);
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            bail!("static directory {} does not exist", dir.display());
        }
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(sommelier_server::serve(sessions.clone(), addr, args.static_dir.clone()))?;
    if let Some(p) = &args.snapshot {
        sessions.save_snapshot(p)?;
        log::info!("saved sessions to {}", p.display());
    }
    io::stdout().flush()?;
    Ok(())
}
