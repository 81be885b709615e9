//! Shared workloads for the benchmarks.

use basenp_core::corpus::synthetic_corpus;
use basenp_core::ruledsl::{parse_rule_list, RuleList};
use basenp_core::Corpus;

/// A rule list in the style of a hand-written chunker: bracket determiner
/// phrases, plural nouns, then clean up.
pub const RULES: &str = "\
A
(* .)
({1} t=DT) (* t=JJ[RS]?) (+ t=NNP?S?)
({1} t=VB[DGNPZ]?)

A
-
({1} t=DT) (* t=JJ) (+ t=NNS?)
-

M
-
(+ c=I)
({1} t=IN)

K
-
({1} t=DT)
-
";

pub fn rule_list() -> RuleList {
    parse_rule_list(RULES).expect("benchmark rules parse")
}

/// Gold corpus of `sentences` synthetic sentences with 1% tag noise.
pub fn gold(sentences: usize) -> Corpus {
    synthetic_corpus(sentences, 42, 0.01)
}
