use serde::Serialize;

use super::{apply_rule_list, RuleList};
use crate::corpus::{ChunkSpan, Corpus};
use crate::error::Result;
use crate::eval::{score, EvalReport};

/// How one sentence's span categories moved between two rule lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentenceDelta {
    pub sentence: usize,
    /// Truth spans the new list gets right and the old list missed.
    pub gained_correct: Vec<ChunkSpan>,
    /// Truth spans the old list got right and the new list misses.
    pub lost_correct: Vec<ChunkSpan>,
    /// Wrong output spans only the new list produces.
    pub new_errors: Vec<ChunkSpan>,
    /// Wrong output spans only the old list produced.
    pub removed_errors: Vec<ChunkSpan>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleListDelta {
    pub old: EvalReport,
    pub new: EvalReport,
    pub precision_delta: f64,
    pub recall_delta: f64,
    pub f_measure_delta: f64,
    /// Only sentences where something changed.
    pub sentences: Vec<SentenceDelta>,
}

impl RuleListDelta {
    pub fn is_zero(&self) -> bool {
        self.sentences.is_empty()
    }
}

fn minus(a: &[ChunkSpan], b: &[ChunkSpan]) -> Vec<ChunkSpan> {
    a.iter().filter(|s| b.binary_search(s).is_err()).copied().collect()
}

fn intersect(a: &[ChunkSpan], b: &[ChunkSpan]) -> Vec<ChunkSpan> {
    a.iter().filter(|s| b.binary_search(s).is_ok()).copied().collect()
}

/// Runs both lists over `raw` and compares each against `truth`.
pub fn diff_rule_lists(old: &RuleList, new: &RuleList, truth: &Corpus, raw: &Corpus) -> Result<RuleListDelta> {
    truth.check_aligned(raw)?;
    let old_out = apply_rule_list(old, raw);
    let new_out = apply_rule_list(new, raw);
    let old_report = score(truth, &old_out)?;
    let new_report = score(truth, &new_out)?;
    let mut sentences = Vec::new();
    for (i, ((t, o), n)) in truth
        .sentences
        .iter()
        .zip(&old_out.sentences)
        .zip(&new_out.sentences)
        .enumerate()
    {
        if o.spans() == n.spans() {
            continue;
        }
        let old_correct = intersect(o.spans(), t.spans());
        let new_correct = intersect(n.spans(), t.spans());
        let old_wrong = minus(o.spans(), t.spans());
        let new_wrong = minus(n.spans(), t.spans());
        sentences.push(SentenceDelta {
            sentence: i,
            gained_correct: minus(&new_correct, &old_correct),
            lost_correct: minus(&old_correct, &new_correct),
            new_errors: minus(&new_wrong, &old_wrong),
            removed_errors: minus(&old_wrong, &new_wrong),
        });
    }
    Ok(RuleListDelta {
        precision_delta: new_report.precision - old_report.precision,
        recall_delta: new_report.recall - old_report.recall,
        f_measure_delta: new_report.f_measure - old_report.f_measure,
        old: old_report,
        new: new_report,
        sentences,
    })
}
