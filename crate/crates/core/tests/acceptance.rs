//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sommelier::cluster::{
    elbow_scan, em_fit, gmm_responsibilities, kmeans_fit, GmmModel, GmmParams, KMeansParams, VARIANCE_FLOOR,
};
use sommelier::embed::{build_cooccurrence, cosine, train_glove, GloveParams};
use sommelier::featurize::{build_vocabulary, compute_tfidf, StopwordSets};
use sommelier::matrix::{DenseMatrix, FeatureMatrix, Points};
use sommelier::pipeline::{featurize_corpus, fit_bundle, PipelineConfig};
use sommelier::recommend::{
    cluster_preferences, preference_from_terms, recommend, regenerate_benchmark, RecommendationSet, UserHistory,
    Verdict,
};
use sommelier::service::{read_bundle, write_bundle, Model};
use sommelier::synth::{archetype_corpus, glove_toy_corpus};

struct Outcome {
    detail: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            detail: String::new(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

/// Name, time budget and check.
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: &[Criterion] = &[
        ("formula oracle", Duration::from_secs(1), formula_oracle),
        ("recommendation oracle", Duration::from_secs(30), recommendation_oracle),
        ("clustering recovery", Duration::from_secs(60), clustering_recovery),
        ("monotonicity suites", Duration::MAX, monotonicity),
        ("elbow property", Duration::MAX, elbow_property),
        ("tf-idf oracle", Duration::MAX, tfidf_oracle),
        ("gmm numerics", Duration::MAX, gmm_numerics),
        ("glove sanity", Duration::from_secs(60), glove_sanity),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let mut out = run();
        let took = start.elapsed();
        if took > *limit {
            out.failures.push(format!("took {took:.2?}, limit {limit:.2?}"));
        }
        if out.failures.is_empty() {
            println!("PASS {name}: {} ({took:.2?})", out.detail);
        } else {
            failed += 1;
            println!("FAIL {name}: {} ({took:.2?})", out.detail);
            for f in &out.failures {
                println!("     - {f}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

fn history(liked: &[usize], disliked: &[usize]) -> UserHistory {
    UserHistory::from_entries(
        liked
            .iter()
            .map(|&w| (w, Verdict::Liked))
            .chain(disliked.iter().map(|&w| (w, Verdict::Disliked))),
    )
}

/// Hand evaluation of the preference formula, by direct counting.
fn preference_by_hand(liked: &[usize], disliked: &[usize], assign: &[usize], k: usize) -> Vec<f64> {
    let mut raw = vec![0.0; k];
    for (c, r) in raw.iter_mut().enumerate() {
        let l = liked.iter().filter(|&&w| assign[w] == c).count() as f64;
        let d = disliked.iter().filter(|&&w| assign[w] == c).count() as f64;
        let x = l / liked.len() as f64;
        let z = if disliked.is_empty() {
            0.0
        } else {
            d / disliked.len() as f64
        };
        *r = x * (l + d) * (1.0 - z);
    }
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let support: Vec<bool> = (0..k).map(|c| liked.iter().any(|&w| assign[w] == c)).collect();
        let n = support.iter().filter(|&&s| s).count() as f64;
        return support.iter().map(|&s| if s { 1.0 / n } else { 0.0 }).collect();
    }
    raw.iter().map(|r| r / total).collect()
}

fn formula_oracle() -> Outcome {
    let mut out = Outcome::new();
    let cases = std::cell::Cell::new(0);
    let compare = |out: &mut Outcome, liked: &[usize], disliked: &[usize], assign: &[usize], k: usize| {
        cases.set(cases.get() + 1);
        let want = preference_by_hand(liked, disliked, assign, k);
        let got = cluster_preferences(&history(liked, disliked), assign, k).expect("liked wines present");
        let ok = got.p.iter().zip(&want).all(|(a, b)| (a - b).abs() <= 1e-12)
            && (got.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        out.check(ok, || {
            format!("liked {liked:?} disliked {disliked:?}: got {:?}, want {want:?}", got.p)
        });
    };

    // Worked example: liked {3 in c0, 1 in c1}, disliked {1 in c1}.
    let assign = [0, 0, 0, 1, 1];
    compare(&mut out, &[0, 1, 2, 3], &[4], &assign, 2);
    let p = cluster_preferences(&history(&[0, 1, 2, 3], &[4]), &assign, 2).unwrap();
    out.check(p.p == vec![1.0, 0.0], || format!("worked example 1 gave {:?}", p.p));

    // Worked example stated on the terms directly: x = (0.6, 0.4), y = (3, 2),
    // z = (0.2, 0.5) -> unnormalized (1.44, 0.40).
    let (p, fallback) = preference_from_terms(&[0.6, 0.4], &[3, 2], &[0.2, 0.5]);
    let want = [1.44 / 1.84, 0.40 / 1.84];
    cases.set(cases.get() + 1);
    out.check(
        !fallback && (p[0] - want[0]).abs() <= 1e-12 && (p[1] - want[1]).abs() <= 1e-12,
        || format!("second worked example gave {p:?}"),
    );
    out.check((p[0] - 0.7826).abs() < 5e-5 && (p[1] - 0.2174).abs() < 5e-5, || {
        format!("second worked example {p:?} vs (0.7826, 0.2174)")
    });

    // No dislikes: z is all zero.
    let assign = [0, 1, 1, 2];
    compare(&mut out, &[0, 1, 2], &[], &assign, 3);
    let p = cluster_preferences(&history(&[0, 1, 2], &[]), &assign, 3).unwrap();
    out.check(p.z.iter().all(|&z| z == 0.0) && !p.fallback, || {
        "no-dislike case".into()
    });

    // Zero normalizer: the only liked cluster also holds every dislike.
    let assign = [0, 0, 1];
    let p = cluster_preferences(&history(&[0], &[1]), &assign, 2).unwrap();
    out.check(p.fallback && p.p == vec![1.0, 0.0], || {
        format!("fallback gave {:?}", p.p)
    });
    compare(&mut out, &[0], &[1], &assign, 2);

    let mut gen = ChaCha8Rng::seed_from_u64(2024);
    let mut fallbacks = 0;
    for _ in 0..40 {
        let k = gen.random_range(1..=6);
        let n = gen.random_range(4..=30);
        let assign: Vec<usize> = (0..n).map(|_| gen.random_range(0..k)).collect();
        let mut ids: Vec<usize> = (0..n).collect();
        ids.shuffle(&mut gen);
        let n_liked = gen.random_range(1..=n.min(8));
        let n_disliked = gen.random_range(0..=(n - n_liked).min(6));
        let liked = &ids[..n_liked];
        let disliked = &ids[n_liked..n_liked + n_disliked];
        if cluster_preferences(&history(liked, disliked), &assign, k)
            .unwrap()
            .fallback
        {
            fallbacks += 1;
        }
        compare(&mut out, liked, disliked, &assign, k);
    }
    out.detail = format!(
        "{} cases ({fallbacks} random fallbacks) match hand evaluation to 1e-12",
        cases.get()
    );
    out
}

fn recommendation_oracle() -> Outcome {
    let mut out = Outcome::new();
    let corpus = archetype_corpus(200, 11);
    let config = PipelineConfig {
        k: 6,
        seed: 5,
        ..PipelineConfig::default()
    };
    let model = Model::from_bundle(fit_bundle(corpus.reviews, StopwordSets::default(), &config).unwrap()).unwrap();
    let catalog = model.catalog();
    let x = model.matrix();
    let gmm = &model.bundle().gmm;
    let n = x.rows();
    let mut bets = 0;
    for seed in 0..50u64 {
        let mut gen = ChaCha8Rng::seed_from_u64(seed);
        let ids: Vec<usize> = (0..n).collect();
        let picked: Vec<usize> = ids.choose_multiple(&mut gen, 10).copied().collect();
        let n_liked = gen.random_range(1..=6);
        let h = history(&picked[..n_liked], &picked[n_liked..]);
        let rc = model.config(seed.wrapping_mul(7919));
        let set = recommend(&h, catalog, &rc).unwrap();
        let mut taken = BTreeSet::new();
        for pick in set.picks() {
            let bench = regenerate_benchmark(&pick.benchmark, x, gmm);
            // Brute force over every wine in the recorded search space.
            let mut best: Option<(usize, f64)> = None;
            for (id, review) in model.reviews().iter().enumerate() {
                let Some(price) = review.price else { continue };
                if h.contains(id) || taken.contains(&id) || x.is_empty_row(id) {
                    continue;
                }
                if !pick.search_space.contains(&gmm.assignments[id]) {
                    continue;
                }
                let dense = x.row_dense(id);
                let d2: f64 = dense.iter().zip(&bench).map(|(a, b)| (a - b) * (a - b)).sum();
                let cost = price.as_f64() / review.score as f64 + rc.lambda * d2.sqrt();
                if best.is_none_or(|(_, c)| cost < c) {
                    best = Some((id, cost));
                }
            }
            let want = best.map(|b| b.0);
            out.check(want == Some(pick.wine_id), || {
                format!("seed {seed}: picked {} but brute force gives {want:?}", pick.wine_id)
            });
            taken.insert(pick.wine_id);
            bets += 1;
        }
        out.check(taken.len() == 4 && taken.iter().all(|&w| !h.contains(w)), || {
            format!("seed {seed}: set invariants violated")
        });
    }
    out.detail = format!("{bets} picks over 50 seeds equal the brute-force minimizer");
    out
}

/// Adjusted Rand index between two labelings.
fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    let choose2 = |n: f64| n * (n - 1.0) / 2.0;
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let sa: f64 = rows.values().map(|&n| choose2(n)).sum();
    let sb: f64 = cols.values().map(|&n| choose2(n)).sum();
    let expected = sa * sb / choose2(a.len() as f64);
    let max = (sa + sb) / 2.0;
    (index - expected) / (max - expected)
}

fn clustering_recovery() -> Outcome {
    let mut out = Outcome::new();
    let mut scores = Vec::new();
    for seed in 0..5 {
        let corpus = archetype_corpus(600, seed);
        let f = featurize_corpus(&corpus.reviews, &StopwordSets::default(), 2).unwrap();
        let x = &f.featurized.matrix;
        let km = kmeans_fit(x, &KMeansParams::new(6, seed).restarts(5)).unwrap();
        let gmm = em_fit(x, &GmmParams::new(6, seed), Some(&km)).unwrap();
        let (a, b) = (
            adjusted_rand_index(&km.assignments, &corpus.labels),
            adjusted_rand_index(&gmm.assignments, &corpus.labels),
        );
        out.check(a >= 0.9, || format!("seed {seed}: k-means ARI {a:.4}"));
        out.check(b >= 0.9, || format!("seed {seed}: GMM ARI {b:.4}"));
        scores.push(format!("{a:.3}/{b:.3}"));
    }
    out.detail = format!("ARI k-means/GMM per seed: {}", scores.join(", "));
    out
}

fn random_sparse(gen: &mut ChaCha8Rng) -> FeatureMatrix {
    let rows = gen.random_range(20..80);
    let cols = gen.random_range(3..15);
    let data = (0..rows)
        .map(|_| {
            let mut row = Vec::new();
            for j in 0..cols {
                if gen.random_bool(0.3) {
                    row.push((j, gen.random_range(0.1..3.0)));
                }
            }
            if row.is_empty() {
                row.push((gen.random_range(0..cols), 1.0));
            }
            row
        })
        .collect();
    FeatureMatrix::from_rows(cols, data)
}

fn monotonicity() -> Outcome {
    let mut out = Outcome::new();
    let mut gen = ChaCha8Rng::seed_from_u64(99);
    let (mut sse_steps, mut ll_steps) = (0, 0);
    for fit in 0..20u64 {
        let x = random_sparse(&mut gen);
        let k = gen.random_range(2..=5);
        let km = kmeans_fit(&x, &KMeansParams::new(k, fit)).unwrap();
        for w in km.sse_history.windows(2) {
            sse_steps += 1;
            out.check(w[1] <= w[0] + 1e-9 * w[0].abs(), || {
                format!("fit {fit}: SSE {} -> {}", w[0], w[1])
            });
        }
        let gmm = em_fit(&x, &GmmParams::new(k, fit), None).unwrap();
        for w in gmm.ll_history.windows(2) {
            ll_steps += 1;
            out.check(w[1] >= w[0] - 1e-7 * w[0].abs(), || {
                format!("fit {fit}: log-likelihood {} -> {}", w[0], w[1])
            });
        }
    }
    out.detail = format!("20 fits, {sse_steps} Lloyd steps and {ll_steps} EM steps monotone");
    out
}

fn elbow_property() -> Outcome {
    let mut out = Outcome::new();
    let mut holds = 0;
    let mut drops = Vec::new();
    for seed in 0..5 {
        let corpus = archetype_corpus(600, 100 + seed);
        let f = featurize_corpus(&corpus.reviews, &StopwordSets::default(), 2).unwrap();
        let curve = elbow_scan(&f.featurized.matrix, &[4, 5, 6, 7, 8], seed, 3, 0.02).unwrap();
        let sse: BTreeMap<usize, f64> = curve.points.iter().copied().collect();
        let drop = |a: usize, b: usize| (sse[&a] - sse[&b]) / sse[&a];
        let (d56, d67) = (drop(5, 6), drop(6, 7));
        if d56 > d67 {
            holds += 1;
        }
        drops.push(format!("{d56:.3}>{d67:.3}"));
        let monotone = curve.points.windows(2).all(|w| w[1].1 <= w[0].1);
        out.check(monotone, || format!("seed {seed}: curve increases: {:?}", curve.points));
    }
    out.check(holds >= 4, || {
        format!("drop 5->6 exceeds 6->7 in only {holds} of 5 seeds")
    });
    out.detail = format!("5->6 vs 6->7 relative drops: {} ({holds}/5)", drops.join(", "));
    out
}

/// Straightforward TF-IDF written from the formula.
fn tfidf_by_hand(docs: &[Vec<String>], terms: &[String]) -> Vec<Vec<f64>> {
    let n = docs.len() as f64;
    let idf: Vec<f64> = terms
        .iter()
        .map(|t| {
            let df = docs.iter().filter(|d| d.contains(t)).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    docs.iter()
        .map(|d| {
            let raw: Vec<f64> = terms
                .iter()
                .zip(&idf)
                .map(|(t, w)| d.iter().filter(|x| *x == t).count() as f64 * w)
                .collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            raw.iter().map(|v| if norm > 0.0 { v / norm } else { 0.0 }).collect()
        })
        .collect()
}

fn tfidf_matches(docs: &[Vec<String>], min_df: usize) -> Result<(), String> {
    let vocab = build_vocabulary(docs, &StopwordSets::empty(), min_df).map_err(|e| e.to_string())?;
    let f = compute_tfidf(docs, &vocab);
    let want = tfidf_by_hand(docs, vocab.terms());
    for (i, row) in want.iter().enumerate() {
        let got = f.matrix.row_dense(i);
        for (j, (a, b)) in got.iter().zip(row).enumerate() {
            if (a - b).abs() > 1e-9 {
                return Err(format!("doc {i} term {}: {a} vs {b}", vocab.term(j)));
            }
        }
    }
    Ok(())
}

fn tfidf_oracle() -> Outcome {
    let mut out = Outcome::new();
    let words = ["cherry", "oak", "plum", "smoke", "lemon", "pear", "spice", "earth"];
    let to_docs = |raw: &[&[&str]]| -> Vec<Vec<String>> {
        raw.iter().map(|d| d.iter().map(|s| s.to_string()).collect()).collect()
    };
    let worked = to_docs(&[&["cherry", "cherry", "oak"], &["cherry", "plum"]]);
    let r = tfidf_matches(&worked, 1);
    out.check(r.is_ok(), || format!("worked example: {r:?}"));
    let vocab = build_vocabulary(&worked, &StopwordSets::empty(), 1).unwrap();
    let row = compute_tfidf(&worked, &vocab).matrix.row_dense(0);
    // Printed to 4 decimals in the reference; the formula gives 0.818180 and 0.574962.
    out.check((row[0] - 0.8183).abs() < 5e-4 && (row[1] - 0.5747).abs() < 5e-4, || {
        format!("worked example row {row:?}")
    });

    let mut gen = ChaCha8Rng::seed_from_u64(7);
    for c in 0..10 {
        let n_docs = gen.random_range(2..12);
        let docs: Vec<Vec<String>> = (0..n_docs)
            .map(|_| {
                (0..gen.random_range(0..10))
                    .map(|_| words.choose(&mut gen).unwrap().to_string())
                    .collect()
            })
            .collect();
        let min_df = gen.random_range(1..=2);
        match tfidf_matches(&docs, min_df) {
            Ok(()) => {}
            Err(e) if e.contains("empty vocabulary") => {}
            Err(e) => out.check(false, || format!("corpus {c}: {e}")),
        }
    }
    out.detail = format!(
        "10 random corpora and the worked example match to 1e-9 (worked row {:.6}, {:.6})",
        row[0], row[1]
    );
    out
}

fn gmm_numerics() -> Outcome {
    let mut out = Outcome::new();
    let mut gen = ChaCha8Rng::seed_from_u64(1000);
    let k = 5;
    let dim = 4;
    let rand_vec = |gen: &mut ChaCha8Rng, lo: f64, hi: f64| (0..dim).map(|_| gen.random_range(lo..hi)).collect();
    let weights: Vec<f64> = {
        let w: Vec<f64> = (0..k).map(|_| gen.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect()
    };
    let model = GmmModel {
        k,
        means: (0..k).map(|_| rand_vec(&mut gen, -3.0, 3.0)).collect(),
        variances: (0..k).map(|_| rand_vec(&mut gen, 1e-3, 2.0)).collect(),
        weights,
        log_likelihood: 0.0,
        seed: 0,
        variance_floor: VARIANCE_FLOOR,
        iterations_run: 0,
        ll_history: vec![],
        assignments: vec![],
    };
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p: Vec<f64> = rand_vec(&mut gen, -50.0, 50.0);
        let r = gmm_responsibilities(&model, &p);
        let err = (r.iter().sum::<f64>() - 1.0).abs();
        worst = worst.max(err);
        out.check(err <= 1e-9 && r.iter().all(|v| (0.0..=1.0).contains(v)), || {
            format!("point {p:?}: {r:?}")
        });
    }
    let symmetric = GmmModel {
        k: 2,
        means: vec![vec![-1.0, 2.0], vec![1.0, 2.0]],
        variances: vec![vec![0.7, 0.2], vec![0.7, 0.2]],
        weights: vec![0.5, 0.5],
        ..model
    };
    let r = gmm_responsibilities(&symmetric, &[0.0, -4.0]);
    out.check((r[0] - 0.5).abs() <= 1e-9 && (r[1] - 0.5).abs() <= 1e-9, || {
        format!("symmetric case {r:?}")
    });
    out.detail = format!(
        "1000 points, worst |sum - 1| = {worst:.1e}; symmetric case ({:.12}, {:.12})",
        r[0], r[1]
    );
    out
}

fn glove_sanity() -> Outcome {
    let mut out = Outcome::new();
    let mut wins = 0;
    let mut fractions = Vec::new();
    for seed in 0..5 {
        let sentences = glove_toy_corpus(500, seed);
        let vocab = build_vocabulary(&sentences, &StopwordSets::empty(), 1).unwrap();
        let cooc = build_cooccurrence(&sentences, &vocab, 5);
        let vectors = train_glove(
            &cooc,
            &GloveParams {
                dim: 10,
                epochs: 30,
                seed,
                ..GloveParams::default()
            },
        )
        .unwrap();
        let steps = vectors.epoch_losses.windows(2).count();
        let down = vectors.epoch_losses.windows(2).filter(|w| w[1] < w[0]).count();
        let frac = down as f64 / steps as f64;
        out.check(frac >= 0.9, || {
            format!("seed {seed}: loss fell in {down}/{steps} epochs")
        });
        let v = |w: &str| vectors.vector(vocab.column(w).unwrap());
        let (near, far) = (cosine(&v("smoky"), &v("tobacco")), cosine(&v("smoky"), &v("lemon")));
        if near > far {
            wins += 1;
        }
        fractions.push(format!("{frac:.2}"));
        out.check(near > far, || {
            format!("seed {seed}: cos(smoky,tobacco) {near:.3} <= cos(smoky,lemon) {far:.3}")
        });
    }
    out.detail = format!(
        "decreasing-epoch fractions {}; cosine ordering {wins}/5",
        fractions.join(", ")
    );
    out
}

fn determinism() -> Outcome {
    let mut out = Outcome::new();
    let corpus = archetype_corpus(240, 3);
    let config = PipelineConfig {
        k: 6,
        seed: 21,
        glove: Some(GloveParams {
            dim: 8,
            epochs: 5,
            ..GloveParams::default()
        }),
        ..PipelineConfig::default()
    };
    let fit = || fit_bundle(corpus.reviews.clone(), StopwordSets::default(), &config).unwrap();
    let (a, b) = (fit(), fit());
    let bytes = |bundle| {
        let mut buf = Vec::new();
        write_bundle(bundle, &mut buf).unwrap();
        buf
    };
    let (ba, bb) = (bytes(&a), bytes(&b));
    out.check(ba == bb, || "identical seeds gave different bundle bytes".into());

    let loaded = read_bundle(ba.as_slice()).unwrap();
    out.check(loaded == a, || "round-trip changed the bundle".into());
    out.check(bytes(&loaded) == ba, || "re-serialized bundle differs".into());

    let original = Model::from_bundle(a).unwrap();
    let restored = Model::from_bundle(loaded).unwrap();
    out.check(original.matrix() == restored.matrix(), || {
        "rebuilt matrices differ".into()
    });
    let h = history(&[0, 7, 12], &[3]);
    let round = |m: &Model, seed| -> RecommendationSet { m.recommend_for(&h, None, &m.config(seed)).unwrap() };
    for seed in [7, 8, 9] {
        out.check(round(&original, seed) == round(&restored, seed), || {
            format!("seed {seed}: recommendations differ after round-trip")
        });
        out.check(round(&original, seed) == round(&original, seed), || {
            format!("seed {seed}: not reproducible")
        });
    }
    let targets = original
        .targets_for(&["licorice".into(), "lemon".into(), "blackberry".into()])
        .unwrap();
    let cold = |m: &Model| {
        m.recommend_for(&UserHistory::new(), Some(&targets), &m.config(7))
            .unwrap()
    };
    out.check(cold(&original) == cold(&restored), || {
        "cold-start round differs after round-trip".into()
    });

    let dense = DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![5.0], vec![6.0]]);
    let km = |s| kmeans_fit(&dense, &KMeansParams::new(2, s).restarts(2)).unwrap();
    out.check(km(3) == km(3) && dense.n_rows() == 4, || {
        "k-means not reproducible".into()
    });
    out.detail = format!(
        "{} byte bundle reproduced and round-tripped; seed 7 set identical",
        ba.len()
    );
    out
}
