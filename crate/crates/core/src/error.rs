use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: unterminated {what}")]
    Unterminated { what: &'static str, line: u32 },

    #[error("line {line}: unexpected character {ch:?}")]
    UnexpectedChar { ch: char, line: u32 },

    #[error("line {line}: unbalanced braces")]
    UnbalancedBraces { line: u32 },

    #[error("vocabulary size must be at least 1, got {0}")]
    InvalidVocabSize(usize),

    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,

    #[error("vector dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cannot balance: {buggy} buggy examples but only {non_buggy} non-buggy candidates")]
    CannotBalance { buggy: usize, non_buggy: usize },

    #[error("{side} pool is empty after the {ratio} split")]
    EmptySplitSide { side: &'static str, ratio: f64 },

    #[error("TF-IDF requires a non-empty vector list")]
    EmptyVectorList,

    #[error("training set contains a single class only")]
    SingleClassTrainingSet,

    #[error("metrics require non-empty, equal-length inputs ({predictions} predictions, {labels} labels)")]
    BadMetricsInput { predictions: usize, labels: usize },

    #[error("repetition {rep}: {source}")]
    Repetition {
        rep: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{name} must lie in {range}, got {value}")]
    InvalidRate {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedRecord {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    BadArtifact { path: String, message: String },
}

impl Error {
    /// Wraps an error with the repetition index it occurred in.
    pub fn in_rep(self, rep: usize) -> Error {
        Error::Repetition {
            rep,
            source: Box::new(self),
        }
    }
}
