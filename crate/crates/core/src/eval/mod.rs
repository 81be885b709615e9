//! Scoring and analysis of predicted base NPs against a gold annotation.
//!
//! Spans are compared by exact identity: a predicted span counts only if a
//! truth span with the same start and end exists in the same sentence.

mod freq;
pub mod reference;
mod report;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedSentence, ChunkSpan, Corpus};
use crate::error::{Error, Result};

pub use freq::{cd_cd_fixture_check, freq_recall, CdCdVerdict, FreqAggregate, FreqBucket, FreqTable, FREQ_THRESHOLD};
pub use report::{render_report_table, ReportFormat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub pr_mean: f64,
    pub truth: usize,
    pub predicted: usize,
    pub matched: usize,
}

/// `num / den` as a percentage; an empty denominator scores 100 when the
/// numerator side is empty too, else 0.
pub(crate) fn ratio(num: usize, den: usize, other: usize) -> f64 {
    if den == 0 {
        if other == 0 {
            100.0
        } else {
            0.0
        }
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn from_counts(truth: usize, predicted: usize, matched: usize) -> Self {
        let precision = ratio(matched, predicted, truth);
        let recall = ratio(matched, truth, predicted);
        // 2PR/(P+R) reduces to 2·matched/(truth+predicted); computing it from
        // the counts avoids rounding that could put F above (P+R)/2.
        let f_measure = if precision + recall == 0.0 {
            0.0
        } else if truth + predicted == 0 {
            100.0
        } else {
            200.0 * matched as f64 / (truth + predicted) as f64
        };
        EvalReport {
            precision,
            recall,
            f_measure,
            pr_mean: (precision + recall) / 2.0,
            truth,
            predicted,
            matched,
        }
    }
}

pub(crate) fn matched_in(truth: &AnnotatedSentence, predicted: &AnnotatedSentence) -> usize {
    // both span lists are sorted and disjoint
    let (a, b) = (truth.spans(), predicted.spans());
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn score(truth: &Corpus, predicted: &Corpus) -> Result<EvalReport> {
    truth.check_aligned(predicted)?;
    let matched = truth
        .sentences
        .iter()
        .zip(&predicted.sentences)
        .map(|(t, p)| matched_in(t, p))
        .sum();
    Ok(EvalReport::from_counts(
        truth.span_count(),
        predicted.span_count(),
        matched,
    ))
}

/// The four display categories of a word sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanCategory {
    /// In no base NP of either annotation.
    Outside = 1,
    /// A base NP in both.
    Correct = 2,
    /// A truth base NP the output missed.
    RecallError = 3,
    /// An output base NP absent from the truth.
    PrecisionError = 4,
}

impl SpanCategory {
    pub fn number(self) -> u8 {
        self as u8
    }

    // per-token display precedence: 3 > 4 > 2 > 1
    fn rank(self) -> u8 {
        match self {
            SpanCategory::Outside => 0,
            SpanCategory::Correct => 1,
            SpanCategory::PrecisionError => 2,
            SpanCategory::RecallError => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CategorizedSpan {
    pub span: ChunkSpan,
    pub category: SpanCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub tokens: Vec<SpanCategory>,
    /// Sorted by span, then category.
    pub spans: Vec<CategorizedSpan>,
}

impl Classification {
    pub fn count(&self, category: SpanCategory) -> usize {
        self.spans.iter().filter(|s| s.category == category).count()
    }
}

pub fn classify_spans(truth: &AnnotatedSentence, predicted: &AnnotatedSentence) -> Result<Classification> {
    if !truth.same_tokens(predicted) {
        return Err(Error::Alignment { sentence: 0 });
    }
    let mut spans = Vec::new();
    for &span in truth.spans() {
        let category = if predicted.spans().binary_search(&span).is_ok() {
            SpanCategory::Correct
        } else {
            SpanCategory::RecallError
        };
        spans.push(CategorizedSpan { span, category });
    }
    for &span in predicted.spans() {
        if truth.spans().binary_search(&span).is_err() {
            spans.push(CategorizedSpan {
                span,
                category: SpanCategory::PrecisionError,
            });
        }
    }
    spans.sort_by_key(|s| (s.span, s.category.number()));
    let mut tokens = vec![SpanCategory::Outside; truth.len()];
    for s in &spans {
        for t in &mut tokens[s.span.start..s.span.end] {
            if s.category.rank() > t.rank() {
                *t = s.category;
            }
        }
    }
    Ok(Classification { tokens, spans })
}
