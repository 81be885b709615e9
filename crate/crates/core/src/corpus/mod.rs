//! Tagged, chunk-annotated text.
//!
//! A sentence carries its tokens plus a set of non-overlapping base NP spans.
//! The same annotation can be viewed per word as IOB tags, where `I` marks a
//! word inside a chunk, `O` a word outside every chunk, and `B` the first word
//! of a chunk that immediately follows another chunk (the IOB1 convention).
//!
//! ```
//! use basenp_core::corpus::{AnnotatedSentence, ChunkSpan, ChunkTag, iob_to_spans};
//!
//! let s = AnnotatedSentence::from_pairs(
//!     &[("the", "DT"), ("dog", "NN"), ("a", "DT"), ("bone", "NN")],
//!     vec![ChunkSpan::new(0, 2), ChunkSpan::new(2, 4)],
//! )
//! .unwrap();
//! let tags = s.iob_tags();
//! assert_eq!(tags, vec![ChunkTag::I, ChunkTag::I, ChunkTag::B, ChunkTag::I]);
//! assert_eq!(iob_to_spans(&tags).unwrap(), s.spans());
//! ```

mod format;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use format::{
    parse_column, parse_flat, parse_flat_sentence, parse_slash, serialize_flat, serialize_slash, write_column,
    write_flat, write_slash, CorpusFormat,
};
pub use synth::synthetic_corpus;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Token {
    word: String,
    pos: String,
}

impl Token {
    /// Builds a token. Neither part may be empty or contain whitespace, and
    /// the POS tag may not contain `/` (the slash format splits on the last
    /// slash of an atom).
    pub fn new(word: impl Into<String>, pos: impl Into<String>) -> Result<Self> {
        let word = word.into();
        let pos = pos.into();
        let reason = if word.is_empty() {
            Some("empty word")
        } else if pos.is_empty() {
            Some("empty POS tag")
        } else if word.chars().any(char::is_whitespace) || pos.chars().any(char::is_whitespace) {
            Some("whitespace inside token")
        } else if pos.contains('/') {
            Some("'/' inside POS tag")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(Error::InvalidToken { word, pos, reason }),
            None => Ok(Token { word, pos }),
        }
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn pos(&self) -> &str {
        &self.pos
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.word, self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChunkTag {
    I,
    O,
    B,
}

impl ChunkTag {
    pub const ALL: [ChunkTag; 3] = [ChunkTag::I, ChunkTag::O, ChunkTag::B];

    pub fn as_str(self) -> &'static str {
        match self {
            ChunkTag::I => "I",
            ChunkTag::O => "O",
            ChunkTag::B => "B",
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            ChunkTag::I => 0,
            ChunkTag::O => 1,
            ChunkTag::B => 2,
        }
    }
}

impl fmt::Display for ChunkTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ChunkTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "I" => Ok(ChunkTag::I),
            "O" => Ok(ChunkTag::O),
            "B" => Ok(ChunkTag::B),
            other => Err(format!("unknown chunk tag {other:?}")),
        }
    }
}

/// Half-open token range `[start, end)` covering one base NP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChunkSpan {
    pub start: usize,
    pub end: usize,
}

impl ChunkSpan {
    pub const fn new(start: usize, end: usize) -> Self {
        ChunkSpan { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn intersects(&self, other: &ChunkSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, index: usize) -> bool {
        self.start <= index && index < self.end
    }
}

impl fmt::Display for ChunkSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// A sentence with its base NP annotation. Spans are kept sorted by start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedSentence {
    tokens: Vec<Token>,
    spans: Vec<ChunkSpan>,
}

impl AnnotatedSentence {
    pub fn new(tokens: Vec<Token>, mut spans: Vec<ChunkSpan>) -> Result<Self> {
        spans.sort_unstable();
        spans.dedup();
        check_spans(&spans, tokens.len())?;
        Ok(AnnotatedSentence { tokens, spans })
    }

    pub fn unannotated(tokens: Vec<Token>) -> Self {
        AnnotatedSentence {
            tokens,
            spans: Vec::new(),
        }
    }

    pub fn from_pairs(pairs: &[(&str, &str)], spans: Vec<ChunkSpan>) -> Result<Self> {
        let tokens = pairs
            .iter()
            .map(|(w, p)| Token::new(*w, *p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(tokens, spans)
    }

    /// Rebuilds a sentence from per-word IOB tags.
    pub fn from_iob(tokens: Vec<Token>, tags: &[ChunkTag]) -> Result<Self> {
        if tags.len() != tokens.len() {
            return Err(Error::Alignment { sentence: 0 });
        }
        let spans = iob_to_spans(tags)?;
        Ok(AnnotatedSentence { tokens, spans })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn spans(&self) -> &[ChunkSpan] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iob_tags(&self) -> Vec<ChunkTag> {
        spans_to_iob(self)
    }

    pub fn with_spans(&self, spans: Vec<ChunkSpan>) -> Result<Self> {
        Self::new(self.tokens.clone(), spans)
    }

    pub fn stripped(&self) -> Self {
        Self::unannotated(self.tokens.clone())
    }

    /// True when both sentences have the same words and tags.
    pub fn same_tokens(&self, other: &AnnotatedSentence) -> bool {
        self.tokens == other.tokens
    }

    pub(crate) fn set_spans_unchecked(&mut self, mut spans: Vec<ChunkSpan>) {
        spans.sort_unstable();
        debug_assert!(check_spans(&spans, self.tokens.len()).is_ok());
        self.spans = spans;
    }
}

fn check_spans(sorted: &[ChunkSpan], len: usize) -> Result<()> {
    for s in sorted {
        if s.start >= s.end || s.end > len {
            return Err(Error::SpanOutOfBounds {
                start: s.start,
                end: s.end,
                len,
            });
        }
    }
    for w in sorted.windows(2) {
        if w[0].end > w[1].start {
            return Err(Error::OverlappingSpans(w[0].start, w[0].end, w[1].start, w[1].end));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Corpus {
    pub label: String,
    pub sentences: Vec<AnnotatedSentence>,
}

impl Corpus {
    pub fn new(label: impl Into<String>, sentences: Vec<AnnotatedSentence>) -> Self {
        Corpus {
            label: label.into(),
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(AnnotatedSentence::len).sum()
    }

    pub fn span_count(&self) -> usize {
        self.sentences.iter().map(|s| s.spans.len()).sum()
    }

    /// Same tokens, no spans.
    pub fn stripped(&self) -> Corpus {
        Corpus {
            label: self.label.clone(),
            sentences: self.sentences.iter().map(|s| s.stripped()).collect(),
        }
    }

    /// Fails with the first sentence index whose tokens differ.
    pub fn check_aligned(&self, other: &Corpus) -> Result<()> {
        if self.sentences.len() != other.sentences.len() {
            return Err(Error::Alignment {
                sentence: self.sentences.len().min(other.sentences.len()),
            });
        }
        match self
            .sentences
            .iter()
            .zip(&other.sentences)
            .position(|(a, b)| !a.same_tokens(b))
        {
            Some(sentence) => Err(Error::Alignment { sentence }),
            None => Ok(()),
        }
    }
}

pub fn spans_to_iob(sentence: &AnnotatedSentence) -> Vec<ChunkTag> {
    let mut tags = vec![ChunkTag::O; sentence.len()];
    let mut prev_end = None;
    for span in &sentence.spans {
        tags[span.start] = if prev_end == Some(span.start) {
            ChunkTag::B
        } else {
            ChunkTag::I
        };
        for tag in &mut tags[span.start + 1..span.end] {
            *tag = ChunkTag::I;
        }
        prev_end = Some(span.end);
    }
    tags
}

/// A `B` tag that does not immediately follow a chunk word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IobViolation {
    pub index: usize,
}

impl fmt::Display for IobViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B at index {} starts no adjacent chunk", self.index)
    }
}

/// Reports the first `B` that sits at position 0 or right after an `O`.
pub fn validate_iob(tags: &[ChunkTag]) -> std::result::Result<(), IobViolation> {
    let mut prev = ChunkTag::O;
    for (index, &tag) in tags.iter().enumerate() {
        if tag == ChunkTag::B && prev == ChunkTag::O {
            return Err(IobViolation { index });
        }
        prev = tag;
    }
    Ok(())
}

pub fn iob_to_spans(tags: &[ChunkTag]) -> Result<Vec<ChunkSpan>> {
    validate_iob(tags).map_err(|v| Error::InvalidIob { index: v.index })?;
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, &tag) in tags.iter().enumerate() {
        match tag {
            ChunkTag::O => {
                if let Some(start) = open.take() {
                    spans.push(ChunkSpan::new(start, i));
                }
            }
            ChunkTag::B => {
                if let Some(start) = open.replace(i) {
                    spans.push(ChunkSpan::new(start, i));
                }
            }
            ChunkTag::I => {
                open.get_or_insert(i);
            }
        }
    }
    if let Some(start) = open {
        spans.push(ChunkSpan::new(start, tags.len()));
    }
    Ok(spans)
}

/// Rewrites every `B` at position 0 or after an `O` to `I`.
pub fn repair_iob(tags: &mut [ChunkTag]) {
    let mut prev = ChunkTag::O;
    for tag in tags.iter_mut() {
        if *tag == ChunkTag::B && prev == ChunkTag::O {
            *tag = ChunkTag::I;
        }
        prev = *tag;
    }
}
