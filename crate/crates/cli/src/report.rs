use std::io::{self, Write};

use anyhow::Result;
use serde::Serialize;

use sommelier::service::{PickView, RecommendationView};

use crate::{FitSummary, Output};

/// Writes either the human table or the JSON record of a result.
pub struct Report {
    output: Output,
}

impl Report {
    pub fn new(output: Output) -> Self {
        Report { output }
    }

    /// A result whose table form is a single line.
    pub fn line<T: Serialize>(&self, value: &T, table: impl FnOnce(&T) -> String) -> Result<()> {
        self.block(value, |v| format!("{}\n", table(v)))
    }

    pub fn block<T: Serialize>(&self, value: &T, table: impl FnOnce(&T) -> String) -> Result<()> {
        let mut out = io::stdout().lock();
        match self.output {
            Output::Table => out.write_all(table(value).as_bytes())?,
            Output::Record => {
                serde_json::to_writer_pretty(&mut out, value)?;
                out.write_all(b"\n")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub fn two_columns(a: &str, b: &str, rows: &[(String, f64)]) -> String {
    let mut s = format!("{a}\t{b}\n");
    for (k, v) in rows {
        s.push_str(&format!("{k}\t{v:.6}\n"));
    }
    s
}

pub fn keyword_table(table: &[Vec<String>]) -> String {
    let mut s = String::from("cluster\tkeywords\n");
    for (c, words) in table.iter().enumerate() {
        s.push_str(&format!("{c}\t{}\n", words.join(", ")));
    }
    s
}

pub fn fit_summary(f: &FitSummary) -> String {
    let mut s = format!(
        "algo\t{}\nk\t{}\nseed\t{}\n{}\t{:.6}\niterations\t{}\n",
        f.algo, f.k, f.seed, f.objective, f.value, f.iterations
    );
    if let Some(d) = &f.bundle_digest {
        s.push_str(&format!("bundle_digest\t{d}\n"));
    }
    s.push_str("\ncluster\tsize\tkeywords\n");
    for (c, (size, words)) in f.cluster_sizes.iter().zip(&f.keywords).enumerate() {
        s.push_str(&format!("{c}\t{size}\t{}\n", words.join(", ")));
    }
    s
}

fn pick_row(p: &PickView) -> String {
    let price = p.wine.price.map_or_else(|| "-".to_owned(), |d| format!("${d:.2}"));
    let place = [p.wine.region.as_str(), p.wine.country.as_str()]
        .iter()
        .filter(|s| !s.is_empty())
        .copied()
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        "{:<8} {:>7} {:>7} {:>9} {:>5} {:>9.4} {:>9.4} {:>9.4}  {} ({}; {})\n",
        format!("{:?}", p.kind).to_lowercase(),
        p.wine.wine_id,
        p.cluster,
        price,
        p.wine.score,
        p.cost.value_term,
        p.cost.distance_term,
        p.cost.total,
        p.wine.name,
        p.wine.winery,
        place
    )
}

pub fn recommendations(r: &RecommendationView) -> String {
    let mut s = format!(
        "{:<8} {:>7} {:>7} {:>9} {:>5} {:>9} {:>9} {:>9}  {}\n",
        "kind", "id", "cluster", "price", "score", "value", "distance", "total", "wine"
    );
    for p in r.bets.iter().chain(std::iter::once(&r.wildcard)) {
        s.push_str(&pick_row(p));
    }
    s.push_str(&format!("seed {}\n", r.seed));
    s
}
