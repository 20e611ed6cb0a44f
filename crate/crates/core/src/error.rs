use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: malformed record: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid source encoding: {0}")]
    Encoding(#[from] std::str::Utf8Error),

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("invalid library spec: {0}")]
    Library(String),

    #[error("cannot sample {requested} records from a set of {available}")]
    SampleTooLarge { requested: usize, available: usize },

    #[error("cannot merge knowledge bases for different libraries ({left} vs {right})")]
    LibraryMismatch { left: String, right: String },

    #[error("no knowledge entry for: {}", .0.join(", "))]
    MissingDocstrings(Vec<String>),

    #[error("invalid prompt spec: {0}")]
    PromptSpec(String),

    #[error("metric weights must sum to 1, got {0}")]
    Weights(f64),

    #[error("backend returned status {status}: {body}")]
    BackendStatus { status: u16, body: String },

    #[error("backend transport error: {0}")]
    BackendTransport(String),

    #[error("no recorded response for prompt hash {0}")]
    ReplayMiss(String),

    #[error("stage `{stage}` requires {artifact}, which does not exist")]
    MissingArtifact { stage: String, artifact: PathBuf },

    #[error("invalid config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
