//! Review ingestion.
//!
//! Records arrive as newline-delimited JSON maps with the keys `name`, `url`,
//! `country`, `review`, `price`, `score`, `winery`, `vintage` and `region`.
//! The scraped data spells the price key `price:`; both spellings are accepted.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Result;

/// Default quality threshold: reviews scoring under 80 points are dropped.
pub const DEFAULT_SCORE_THRESHOLD: u32 = 80;

/// Valid range of the points scale.
pub const SCORE_RANGE: std::ops::RangeInclusive<u32> = 50..=100;

/// A positive amount of money, held in cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Price(u64);

impl Price {
    pub fn from_cents(cents: u64) -> Option<Self> {
        (cents > 0).then_some(Price(cents))
    }

    pub fn cents(self) -> u64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Price {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "${}.{:02}", self.0 / 100, self.0 % 100)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    /// Row index into the design matrix.
    pub id: usize,
    pub name: String,
    pub winery: String,
    pub country: String,
    pub region: String,
    pub vintage: Option<i32>,
    pub price: Option<Price>,
    pub score: u32,
    pub review_text: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_read: usize,
    pub rejected_malformed: usize,
    pub rejected_low_score: usize,
    pub retained: usize,
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "total_read={} rejected_malformed={} rejected_low_score={} retained={}",
            self.total_read, self.rejected_malformed, self.rejected_low_score, self.retained
        )
    }
}

/// Why a record was rejected, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub reviews: Vec<Review>,
    pub stats: CorpusStats,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses newline-delimited review records, applying the default score threshold.
pub fn parse_reviews<R: BufRead>(source: R) -> Result<Ingested> {
    parse_reviews_with_threshold(source, DEFAULT_SCORE_THRESHOLD)
}

pub fn parse_reviews_with_threshold<R: BufRead>(source: R, threshold: u32) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.stats.total_read += 1;
        match parse_record(&line) {
            Ok(review) if review.score < threshold => {
                out.stats.rejected_low_score += 1;
            }
            Ok(mut review) => {
                review.id = out.reviews.len();
                out.reviews.push(review);
            }
            Err(reason) => {
                log::warn!("line {}: {}", lineno + 1, reason);
                out.stats.rejected_malformed += 1;
                out.diagnostics.push(Diagnostic {
                    line: lineno + 1,
                    reason,
                });
            }
        }
    }
    out.stats.retained = out.reviews.len();
    Ok(out)
}

fn parse_record(line: &str) -> std::result::Result<Review, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid record: {e}"))?;
    let map = value.as_object().ok_or_else(|| "record is not a map".to_string())?;

    let name = text_field(map, "name")?.ok_or("missing `name`")?;
    let review_text = text_field(map, "review")?.ok_or("missing `review`")?;
    let score = match map.get("score") {
        Some(v) => parse_score(v)?,
        None => return Err("missing `score`".into()),
    };
    if !SCORE_RANGE.contains(&score) {
        return Err(format!("score {score} outside 50..=100"));
    }
    let price = match map.get("price").or_else(|| map.get("price:")) {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => parse_price(s),
        Some(Value::Number(n)) => n.as_f64().and_then(price_from_f64),
        Some(_) => return Err("`price` has an unexpected type".into()),
    };
    let vintage = match map.get("vintage") {
        Some(Value::String(s)) => s.trim().parse::<i32>().ok(),
        Some(Value::Number(n)) => n.as_i64().and_then(|v| i32::try_from(v).ok()),
        _ => None,
    };

    Ok(Review {
        id: 0,
        name,
        winery: text_field(map, "winery")?.unwrap_or_default(),
        country: text_field(map, "country")?.unwrap_or_default(),
        region: text_field(map, "region")?.unwrap_or_default(),
        vintage,
        price,
        score,
        review_text,
    })
}

fn text_field(map: &Map<String, Value>, key: &str) -> std::result::Result<Option<String>, String> {
    match map.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err(format!("`{key}` is not text")),
    }
}

fn parse_score(v: &Value) -> std::result::Result<u32, String> {
    match v {
        Value::String(s) => s.trim().parse::<u32>().map_err(|_| format!("non-integer score {s:?}")),
        Value::Number(n) => n
            .as_u64()
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| format!("non-integer score {n}")),
        _ => Err("`score` has an unexpected type".into()),
    }
}

fn price_from_f64(v: f64) -> Option<Price> {
    if !v.is_finite() || v <= 0.0 {
        return None;
    }
    Price::from_cents((v * 100.0).round() as u64)
}

/// Parses a price such as `$65` or `$1,250.50`.
///
/// Leading currency symbols and thousands separators are stripped. Anything
/// unparseable or non-positive yields `None`.
pub fn parse_price(raw: &str) -> Option<Price> {
    let trimmed = raw
        .trim()
        .trim_start_matches(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-'));
    let cleaned: String = trimmed.chars().filter(|&c| c != ',').collect();
    if cleaned.is_empty() {
        return None;
    }
    cleaned.parse::<f64>().ok().and_then(price_from_f64)
}

/// Keeps reviews scoring at least `threshold`, in order.
pub fn filter_quality(reviews: &[Review], threshold: u32) -> Vec<Review> {
    reviews.iter().filter(|r| r.score >= threshold).cloned().collect()
}

/// Writes reviews back in the ingestion format.
pub fn write_reviews<W: Write>(reviews: &[Review], mut out: W) -> Result<()> {
    for r in reviews {
        let mut map = Map::new();
        map.insert("name".into(), Value::String(r.name.clone()));
        map.insert("url".into(), Value::Null);
        map.insert("country".into(), Value::String(r.country.clone()));
        map.insert("review".into(), Value::String(r.review_text.clone()));
        map.insert(
            "price".into(),
            r.price.map(|p| Value::String(p.to_string())).unwrap_or(Value::Null),
        );
        map.insert("score".into(), Value::String(r.score.to_string()));
        map.insert("winery".into(), Value::String(r.winery.clone()));
        map.insert(
            "vintage".into(),
            Value::String(r.vintage.map(|v| v.to_string()).unwrap_or_else(|| "NV".into())),
        );
        map.insert("region".into(), Value::String(r.region.clone()));
        serde_json::to_writer(&mut out, &Value::Object(map)).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
