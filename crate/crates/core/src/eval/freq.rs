use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::ratio;
use crate::corpus::{AnnotatedSentence, ChunkSpan, Corpus};
use crate::error::Result;

/// Split point between rare and frequent POS sequences.
pub const FREQ_THRESHOLD: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqBucket {
    /// How often the POS sequence occurs among training base NPs.
    pub train_count: usize,
    pub test_nps: usize,
    pub recalled: usize,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqAggregate {
    pub test_nps: usize,
    pub recalled: usize,
    pub recall: f64,
}

impl FreqAggregate {
    fn of<'a>(buckets: impl Iterator<Item = &'a FreqBucket>) -> Self {
        let (test_nps, recalled) = buckets.fold((0, 0), |(n, r), b| (n + b.test_nps, r + b.recalled));
        FreqAggregate {
            test_nps,
            recalled,
            recall: ratio(recalled, test_nps, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqTable {
    /// Sorted by `train_count`.
    pub buckets: Vec<FreqBucket>,
    pub threshold: usize,
    pub below: FreqAggregate,
    pub at_or_above: FreqAggregate,
}

impl FreqTable {
    /// `train_count<TAB>recall` lines, one per bucket.
    pub fn series(&self) -> String {
        self.buckets
            .iter()
            .map(|b| format!("{}\t{:.2}\n", b.train_count, b.recall))
            .collect()
    }

    pub fn overall(&self) -> FreqAggregate {
        FreqAggregate::of(self.buckets.iter())
    }
}

fn pos_key(sentence: &AnnotatedSentence, span: ChunkSpan) -> String {
    sentence.tokens()[span.start..span.end]
        .iter()
        .map(|t| t.pos())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Recall of test base NPs grouped by how often their POS sequence occurs
/// among the training base NPs.
pub fn freq_recall(train_truth: &Corpus, test_truth: &Corpus, predicted: &Corpus) -> Result<FreqTable> {
    test_truth.check_aligned(predicted)?;
    let mut train_counts: FxHashMap<String, usize> = FxHashMap::default();
    for s in &train_truth.sentences {
        for &span in s.spans() {
            *train_counts.entry(pos_key(s, span)).or_default() += 1;
        }
    }
    let mut rows: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (truth, pred) in test_truth.sentences.iter().zip(&predicted.sentences) {
        for &span in truth.spans() {
            let count = train_counts.get(&pos_key(truth, span)).copied().unwrap_or(0);
            let row = rows.entry(count).or_default();
            row.0 += 1;
            if pred.spans().binary_search(&span).is_ok() {
                row.1 += 1;
            }
        }
    }
    let buckets: Vec<FreqBucket> = rows
        .into_iter()
        .map(|(train_count, (test_nps, recalled))| FreqBucket {
            train_count,
            test_nps,
            recalled,
            recall: ratio(recalled, test_nps, 0),
        })
        .collect();
    Ok(FreqTable {
        below: FreqAggregate::of(buckets.iter().filter(|b| b.train_count < FREQ_THRESHOLD)),
        at_or_above: FreqAggregate::of(buckets.iter().filter(|b| b.train_count >= FREQ_THRESHOLD)),
        threshold: FREQ_THRESHOLD,
        buckets,
    })
}

/// Outcome of the two-number-pairs regression check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CdCdVerdict {
    Pass,
    /// The five tokens `CD CD TO CD CD` were bracketed as one base NP.
    MergedSpan {
        span: ChunkSpan,
    },
    /// One or both number pairs were not bracketed.
    MissingSpans {
        missing: Vec<ChunkSpan>,
    },
}

impl CdCdVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, CdCdVerdict::Pass)
    }
}

/// Checks a system's output on a sentence containing `CD CD TO CD CD`:
/// both number pairs must be separate base NPs and the five-token sequence
/// must not be bracketed whole. Looks at the first such sequence.
pub fn cd_cd_fixture_check(output: &AnnotatedSentence) -> CdCdVerdict {
    let tags: Vec<&str> = output.tokens().iter().map(|t| t.pos()).collect();
    let Some(at) = tags.windows(5).position(|w| w == ["CD", "CD", "TO", "CD", "CD"]) else {
        return CdCdVerdict::MissingSpans { missing: Vec::new() };
    };
    let merged = ChunkSpan::new(at, at + 5);
    if output.spans().contains(&merged) {
        return CdCdVerdict::MergedSpan { span: merged };
    }
    let missing: Vec<ChunkSpan> = [ChunkSpan::new(at, at + 2), ChunkSpan::new(at + 3, at + 5)]
        .into_iter()
        .filter(|s| !output.spans().contains(s))
        .collect();
    if missing.is_empty() {
        CdCdVerdict::Pass
    } else {
        CdCdVerdict::MissingSpans { missing }
    }
}
