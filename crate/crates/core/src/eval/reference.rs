//! Published reference results, kept as documented constants.
//!
//! These come from a study in which eleven students wrote rule lists on a
//! 25k-word training corpus, compared with a transformation-based learner
//! trained on 25k and 200k words. The corpus is not redistributable, so the
//! numbers are not reproduced here; they exist for side-by-side display.

/// One row: precision, recall, F-measure and (P+R)/2, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub name: &'static str,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub pr_mean: f64,
}

const fn row(name: &'static str, precision: f64, recall: f64, f_measure: f64, pr_mean: f64) -> ReferenceRow {
    ReferenceRow {
        name,
        precision,
        recall,
        f_measure,
        pr_mean,
    }
}

/// Students' final rule lists scored on the training corpus.
pub const STUDENTS_TRAIN: [ReferenceRow; 11] = [
    row("Student 1", 87.8, 88.6, 88.2, 88.2),
    row("Student 2", 88.1, 88.2, 88.2, 88.2),
    row("Student 3", 88.6, 87.6, 88.1, 88.2),
    row("Student 4", 88.0, 87.2, 87.6, 87.6),
    row("Student 5", 86.2, 86.8, 86.5, 86.5),
    row("Student 6", 86.0, 87.1, 86.6, 86.6),
    row("Student 7", 84.9, 86.7, 85.8, 85.8),
    row("Student 8", 83.6, 86.0, 84.8, 84.8),
    row("Student 9", 83.9, 85.0, 84.4, 84.5),
    row("Student 10", 82.8, 84.5, 83.6, 83.7),
    row("Student 11", 84.8, 78.8, 81.7, 81.8),
];

/// The same rule lists scored on the test corpus.
pub const STUDENTS_TEST: [ReferenceRow; 11] = [
    row("Student 1", 88.0, 88.8, 88.4, 88.4),
    row("Student 2", 88.2, 87.9, 88.0, 88.1),
    row("Student 3", 88.3, 87.8, 88.0, 88.1),
    row("Student 4", 86.9, 85.9, 86.4, 86.4),
    row("Student 5", 85.8, 85.8, 85.8, 85.8),
    row("Student 6", 85.8, 87.1, 86.4, 86.5),
    row("Student 7", 85.3, 87.3, 86.3, 86.3),
    row("Student 8", 83.1, 85.7, 84.4, 84.4),
    row("Student 9", 83.5, 84.8, 84.1, 84.2),
    row("Student 10", 83.3, 84.4, 83.8, 83.8),
    row("Student 11", 84.0, 77.4, 80.6, 80.7),
];

/// The learner on the test corpus, by training-set size.
pub const LEARNER_25K: ReferenceRow = row("25k words", 88.7, 89.3, 89.0, 89.0);
pub const LEARNER_200K: ReferenceRow = row("200k words", 91.8, 92.3, 92.0, 92.1);

/// Test-set recall for POS sequences seen 5 times in training.
pub const RECALL_AT_5_STUDENTS: f64 = 63.6;
pub const RECALL_AT_5_LEARNER: f64 = 83.5;
/// Recall for sequences seen fewer than 6 times.
pub const RECALL_BELOW_6_LEARNER: f64 = 62.8;
pub const RECALL_BELOW_6_STUDENTS: f64 = 54.8;
/// Recall for sequences seen 6 or more times.
pub const RECALL_AT_OR_ABOVE_6_LEARNER: f64 = 93.7;
pub const RECALL_AT_OR_ABOVE_6_STUDENTS: f64 = 93.5;
