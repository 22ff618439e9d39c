//! Content-based wine recommendation over clustered review texts.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`corpus`]: ingest newline-delimited review records and apply the quality filter.
//! - [`featurize`]: tokenize, build the vocabulary, and produce the sparse TF-IDF design matrix.
//! - [`cluster`]: k-means (Lloyd and mini-batch), diagonal Gaussian mixture EM, elbow scans.
//! - [`embed`]: GloVe word vectors trained on the corpus and weighted review embeddings.
//! - [`recommend`]: cluster-preference sampling, benchmark sampling, cost minimization, cold start.
//! - [`service`]: persisted model bundles and recommendation sessions.

pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod featurize;
pub mod matrix;
mod packed;
pub mod pipeline;
pub mod recommend;
pub mod seed;
pub mod service;
pub mod synth;

pub use error::{Error, Result};
