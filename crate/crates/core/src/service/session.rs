use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::recommend::{RecommendationSet, UserHistory, Verdict, WineId};
use crate::seed::{derive_indexed, derive_seed};
use crate::Error;

use super::Model;

pub const PRECONDITION_MESSAGE: &str = "answer questionnaire or submit feedback first";

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("session {0} not found")]
    NotFound(String),

    #[error("{}", PRECONDITION_MESSAGE)]
    NotReady,

    #[error(transparent)]
    Core(#[from] Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub history: UserHistory,
    /// Questionnaire target clusters.
    pub cold_start_state: Option<Vec<usize>>,
    pub last_recommendations: Option<RecommendationSet>,
    /// Seed derived from the bundle digest and the session id.
    pub seed: u64,
    /// Rounds served so far; round `r` uses seed `derive_indexed(seed, "round", r)`.
    pub seed_stream_position: u64,
}

impl Session {
    fn new(session_id: String, model: &Model) -> Self {
        let seed = derive_seed(model.digest_seed(), &session_id);
        Session {
            session_id,
            history: UserHistory::new(),
            cold_start_state: None,
            last_recommendations: None,
            seed,
            seed_stream_position: 0,
        }
    }

    pub fn round_seed(&self, round: u64) -> u64 {
        derive_indexed(self.seed, "round", round)
    }
}

/// Saved session state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub bundle_digest: String,
    pub next_session: u64,
    pub sessions: Vec<Session>,
}

/// In-memory sessions over one shared model. Each session has its own lock,
/// so requests for different sessions proceed in parallel.
#[derive(Debug)]
pub struct SessionManager {
    model: Arc<Model>,
    state: RwLock<State>,
}

#[derive(Debug, Default)]
struct State {
    next_session: u64,
    sessions: BTreeMap<String, Arc<Mutex<Session>>>,
}

impl SessionManager {
    pub fn new(model: Arc<Model>) -> Self {
        SessionManager {
            model,
            state: RwLock::new(State::default()),
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Creates a session. Ids are derived from the bundle digest and a
    /// counter, so they are unique within a manager.
    pub fn create_session(&self) -> Session {
        let mut state = self.state.write().expect("session table poisoned");
        let n = state.next_session;
        state.next_session += 1;
        let id = format!("{:016x}", derive_indexed(self.model.digest_seed(), "session-id", n));
        let session = Session::new(id.clone(), &self.model);
        state.sessions.insert(id, Arc::new(Mutex::new(session.clone())));
        session
    }

    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, SessionError>,
    ) -> Result<T, SessionError> {
        let slot = {
            let state = self.state.read().expect("session table poisoned");
            state
                .sessions
                .get(id)
                .cloned()
                .ok_or_else(|| SessionError::NotFound(id.to_owned()))?
        };
        let mut session = slot.lock().expect("session poisoned");
        // Work on a copy so a failed operation leaves the session unchanged.
        let mut draft = session.clone();
        let out = f(&mut draft)?;
        *session = draft;
        Ok(out)
    }

    pub fn session(&self, id: &str) -> Result<Session, SessionError> {
        self.with_session(id, |s| Ok(s.clone()))
    }

    /// Records questionnaire keywords and returns the matched target clusters.
    pub fn submit_questionnaire(&self, id: &str, keywords: &[String]) -> Result<Vec<usize>, SessionError> {
        self.with_session(id, |s| {
            let targets = self.model.targets_for(keywords)?;
            s.cold_start_state = Some(targets.clone());
            Ok(targets)
        })
    }

    /// Serves the next round and advances the session's seed stream.
    pub fn get_recommendations(&self, id: &str) -> Result<RecommendationSet, SessionError> {
        self.with_session(id, |s| {
            if !s.history.has_liked() && s.cold_start_state.is_none() {
                return Err(SessionError::NotReady);
            }
            let config = self.model.config(s.round_seed(s.seed_stream_position));
            let set = self
                .model
                .recommend_for(&s.history, s.cold_start_state.as_deref(), &config)?;
            s.seed_stream_position += 1;
            s.last_recommendations = Some(set.clone());
            Ok(set)
        })
    }

    /// Records a verdict (the latest one per wine wins) and returns the history size.
    pub fn submit_feedback(&self, id: &str, wine_id: WineId, verdict: Verdict) -> Result<usize, SessionError> {
        self.with_session(id, |s| {
            if wine_id >= self.model.reviews().len() {
                return Err(Error::UnknownWine(wine_id).into());
            }
            s.history.record(wine_id, verdict);
            Ok(s.history.len())
        })
    }

    pub fn snapshot(&self) -> Snapshot {
        let state = self.state.read().expect("session table poisoned");
        Snapshot {
            bundle_digest: self.model.digest().to_owned(),
            next_session: state.next_session,
            sessions: state
                .sessions
                .values()
                .map(|s| s.lock().expect("session poisoned").clone())
                .collect(),
        }
    }

    pub fn save_snapshot(&self, path: impl AsRef<Path>) -> crate::Result<()> {
        let text = serde_json::to_string_pretty(&self.snapshot()).map_err(std::io::Error::from)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    /// Restores sessions saved against the same bundle.
    pub fn restore(model: Arc<Model>, snapshot: Snapshot) -> crate::Result<Self> {
        if snapshot.bundle_digest != model.digest() {
            return Err(super::BundleError::DigestMismatch {
                what: "snapshot bundle",
                recorded: snapshot.bundle_digest,
                actual: model.digest().to_owned(),
            }
            .into());
        }
        let n = model.reviews().len();
        for s in &snapshot.sessions {
            s.history.validate(n)?;
        }
        let sessions = snapshot
            .sessions
            .into_iter()
            .map(|s| (s.session_id.clone(), Arc::new(Mutex::new(s))))
            .collect();
        Ok(SessionManager {
            model,
            state: RwLock::new(State {
                next_session: snapshot.next_session,
                sessions,
            }),
        })
    }

    pub fn load_snapshot(model: Arc<Model>, path: impl AsRef<Path>) -> crate::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let snapshot: Snapshot =
            serde_json::from_str(&text).map_err(|e| super::BundleError::Corrupt(format!("snapshot: {e}")))?;
        Self::restore(model, snapshot)
    }
}
