//! Base noun phrase chunking workbench.
//!
//! The crate bundles everything needed to compare hand-written bracketing
//! rules against a transformation-based learner on the same corpus:
//!
//! - [`corpus`]: tokens, chunk spans, IOB tags and the slash / flat / column
//!   file formats.
//! - [`pattern`]: the quantified pattern language over tagged tokens and its
//!   compilation to a flat-text substitution expression.
//! - [`ruledsl`]: Add / Kill / Transform / Merge rules and ordered rule lists.
//! - [`tbl`]: baseline tagging and greedy error-driven rule learning.
//! - [`eval`]: precision / recall scoring, span coloring categories and
//!   frequency-stratified recall.
//! - [`service`]: on-disk sessions backing the interactive rule editor.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod pattern;
pub mod ruledsl;
pub mod service;
pub mod tbl;

pub use corpus::{AnnotatedSentence, ChunkSpan, ChunkTag, Corpus, CorpusFormat, Token};
pub use error::{Error, Result};
pub use eval::{EvalReport, SpanCategory};
pub use pattern::{MatchSite, SequencePattern};
pub use ruledsl::{Rule, RuleAction, RuleList};
pub use tbl::{LearnerConfig, TblRule};
