use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::cluster::{GmmModel, KMeansModel};
use crate::corpus::{write_reviews, Review};
use crate::embed::WordVectors;
use crate::featurize::{StopwordSets, VocabIndex};
use crate::recommend::RecommenderConfig;
use crate::seed::digest_hex;
use crate::Result;

pub const BUNDLE_FORMAT: &str = "sommelier-bundle";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("unsupported version {found} (expected {BUNDLE_VERSION})")]
    UnsupportedVersion { found: u64 },

    #[error("digest mismatch: {what} is {actual}, recorded {recorded}")]
    DigestMismatch {
        what: &'static str,
        recorded: String,
        actual: String,
    },

    #[error("corrupt bundle: {0}")]
    Corrupt(String),
}

impl BundleError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            BundleError::UnsupportedVersion { .. } => "unsupported_version",
            BundleError::DigestMismatch { .. } => "digest_mismatch",
            BundleError::Corrupt(_) => "corrupt_bundle",
        }
    }
}

/// A fitted model with the corpus it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    /// SHA-256 of the retained corpus in its canonical record form.
    pub corpus_digest: String,
    pub reviews: Vec<Review>,
    pub stopwords: StopwordSets,
    pub min_df: usize,
    pub vocab: VocabIndex,
    pub idf: Vec<f64>,
    pub kmeans: KMeansModel,
    pub gmm: GmmModel,
    /// Top keywords of every mixture component.
    pub keyword_table: Vec<Vec<String>>,
    pub word_vectors: Option<WordVectors>,
    pub defaults: RecommenderConfig,
    pub fit_seed: u64,
}

#[derive(Serialize)]
struct EnvelopeOut<'a> {
    format: &'static str,
    format_version: u32,
    payload_digest: String,
    payload: &'a ModelBundle,
}

pub fn corpus_digest(reviews: &[Review]) -> Result<String> {
    let mut buf = Vec::new();
    write_reviews(reviews, &mut buf)?;
    Ok(digest_hex(&buf))
}

impl ModelBundle {
    /// SHA-256 of the canonical serialized payload. Sessions derive their
    /// seeds from it.
    pub fn digest(&self) -> String {
        digest_hex(&serde_json::to_vec(self).expect("bundle serializes"))
    }

    pub fn validate(&self) -> std::result::Result<(), BundleError> {
        let corrupt = |m: &str| Err(BundleError::Corrupt(m.to_owned()));
        let n = self.reviews.len();
        if self.reviews.iter().enumerate().any(|(i, r)| r.id != i) {
            return corrupt("review ids are not positional");
        }
        if self.idf.len() != self.vocab.len() {
            return corrupt("idf length differs from vocabulary");
        }
        if self.gmm.assignments.len() != n || self.kmeans.assignments.len() != n {
            return corrupt("assignments do not cover the corpus");
        }
        if self.gmm.dim() != self.vocab.len() || self.gmm.k != self.kmeans.k {
            return corrupt("model dimensions differ");
        }
        if self.keyword_table.len() != self.gmm.k {
            return corrupt("keyword table does not match component count");
        }
        let actual = corpus_digest(&self.reviews).map_err(|e| BundleError::Corrupt(e.to_string()))?;
        if actual != self.corpus_digest {
            return Err(BundleError::DigestMismatch {
                what: "corpus",
                recorded: self.corpus_digest.clone(),
                actual,
            });
        }
        Ok(())
    }
}

/// Writes the versioned envelope. Serialization is deterministic, so equal
/// bundles give byte-identical files.
pub fn write_bundle<W: Write>(bundle: &ModelBundle, mut out: W) -> Result<()> {
    bundle.validate()?;
    let env = EnvelopeOut {
        format: BUNDLE_FORMAT,
        format_version: BUNDLE_VERSION,
        payload_digest: bundle.digest(),
        payload: bundle,
    };
    serde_json::to_writer_pretty(&mut out, &env).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_bundle<R: Read>(mut input: R) -> Result<ModelBundle> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| BundleError::Corrupt(e.to_string()))?;
    let mut env: Value = serde_json::from_str(&text).map_err(|e| BundleError::Corrupt(e.to_string()))?;
    let obj = env
        .as_object_mut()
        .ok_or_else(|| BundleError::Corrupt("envelope is not a map".into()))?;
    if obj.get("format").and_then(Value::as_str) != Some(BUNDLE_FORMAT) {
        return Err(BundleError::Corrupt("not a sommelier bundle".into()).into());
    }
    let version = obj
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| BundleError::Corrupt("missing format_version".into()))?;
    if version != u64::from(BUNDLE_VERSION) {
        return Err(BundleError::UnsupportedVersion { found: version }.into());
    }
    let recorded = obj
        .get("payload_digest")
        .and_then(Value::as_str)
        .ok_or_else(|| BundleError::Corrupt("missing payload_digest".into()))?
        .to_owned();
    let payload = obj
        .remove("payload")
        .ok_or_else(|| BundleError::Corrupt("missing payload".into()))?;
    let bundle: ModelBundle = serde_json::from_value(payload).map_err(|e| BundleError::Corrupt(e.to_string()))?;
    let actual = bundle.digest();
    if actual != recorded {
        return Err(BundleError::DigestMismatch {
            what: "payload",
            recorded,
            actual,
        }
        .into());
    }
    bundle.validate()?;
    Ok(bundle)
}

pub fn save_bundle(bundle: &ModelBundle, path: impl AsRef<Path>) -> Result<()> {
    write_bundle(bundle, BufWriter::new(File::create(path)?))
}

pub fn load_bundle(path: impl AsRef<Path>) -> Result<ModelBundle> {
    read_bundle(BufReader::new(File::open(path)?))
}
