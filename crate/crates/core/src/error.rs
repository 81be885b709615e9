use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid token {word:?}/{pos:?}: {reason}")]
    InvalidToken {
        word: String,
        pos: String,
        reason: &'static str,
    },

    #[error("invalid span [{start},{end}) in a sentence of {len} tokens")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },

    #[error("spans [{0},{1}) and [{2},{3}) overlap")]
    OverlappingSpans(usize, usize, usize, usize),

    #[error("invalid IOB sequence: B at index {index} does not follow a chunk")]
    InvalidIob { index: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("token {0:?} contains '_' and cannot be written in the flat encoding")]
    UnderscoreInToken(String),

    #[error("pattern syntax error at offset {offset}: {message}")]
    PatternSyntax { offset: usize, message: String },

    #[error("invalid regular expression {expr:?}: {source}")]
    InvalidRegex {
        expr: String,
        #[source]
        source: regex::Error,
    },

    #[error("target pattern must consume at least one token")]
    EmptyTarget,

    #[error("{0} cannot be expressed in the flat substitution form")]
    UnsupportedAtom(String),

    #[error("rule line {line}: {message}")]
    Rule { line: usize, message: String },

    #[error("rule {index}: {source}")]
    RuleList {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("corpora are not token-aligned at sentence {sentence}")]
    Alignment { sentence: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("template: {0}")]
    Template(String),

    #[error("model file line {line}: {message}")]
    Model { line: usize, message: String },

    #[error("unknown session {0}")]
    UnknownSession(String),

    #[error("session has no tentative rule list")]
    NoTentative,

    #[error("no test corpus attached to session")]
    NoTestCorpus,

    #[error("sentence range {start}..{end} outside corpus of {len} sentences")]
    Range { start: usize, end: usize, len: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt session store {path}: {message}")]
    Store { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
