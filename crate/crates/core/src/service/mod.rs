//! Persisted model bundles and recommendation sessions.
//!
//! A [`ModelBundle`] carries everything a recommendation needs: the retained
//! corpus, vocabulary and idf, both clusterings and the keyword table. At load
//! time the TF-IDF matrix is rebuilt from the corpus, so the file stays small
//! and the rebuilt matrix is bit-identical to the one the models were fitted on.

mod bundle;
mod model;
mod session;
mod view;

pub use bundle::{
    corpus_digest, load_bundle, read_bundle, save_bundle, write_bundle, BundleError, ModelBundle, BUNDLE_FORMAT,
    BUNDLE_VERSION,
};
pub use model::Model;
pub use session::{Session, SessionError, SessionManager, Snapshot, PRECONDITION_MESSAGE};
pub use view::{PickView, RecommendationView, WineSummary};
