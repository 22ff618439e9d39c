use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("k = {k} exceeds the number of usable rows ({rows})")]
    TooManyClusters { k: usize, rows: usize },

    #[error("numerical failure at iteration {iteration}")]
    NumericalFailure { iteration: usize },

    #[error("cold start required: history has no liked wines")]
    ColdStartRequired,

    #[error("no matching palate for the given keywords")]
    NoMatchingPalate,

    #[error("no keyword is present in the vocabulary")]
    NoKnownKeywords,

    #[error("insufficient candidates: {available} available, 4 required")]
    InsufficientCandidates { available: usize },

    #[error("wine {0} is not in the corpus")]
    UnknownWine(usize),

    #[error("wine {0} has no price")]
    MissingPrice(usize),

    #[error("cluster {0} has no liked history wine")]
    NoLikedWineInCluster(usize),

    #[error("bundle error: {0}")]
    Bundle(#[from] crate::service::BundleError),
}

impl Error {
    pub(crate) fn invalid(arg: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            arg,
            reason: reason.into(),
        }
    }
}
