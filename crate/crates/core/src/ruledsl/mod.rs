//! Hand-written bracketing rules.
//!
//! A rule is four lines: an action letter, then the before-context, target and
//! after-context patterns. A line holding only `-` is the empty pattern, and a
//! line starting with whitespace continues the pattern above it.
//!
//! ```text
//! A
//! (* .)
//! ({1} t=DT) (* t=JJ[RS]?) (+ t=NNP?S?)
//! ({1} t=VB[DGNPZ]?)
//! ```
//!
//! | action        | effect on the target extent                                 |
//! |---------------|-------------------------------------------------------------|
//! | `A` Add       | bracket it; every token must be outside all base NPs        |
//! | `K` Kill      | remove the base NP that coincides with it exactly           |
//! | `T` Transform | the one base NP it intersects takes its extent              |
//! | `M` Merge     | the two base NPs it intersects become their convex hull     |
//!
//! A rule list applies its rules in order; each rule makes a single
//! left-to-right pass over every sentence.

mod diff;

use std::fmt;

use serde::Serialize;

use crate::corpus::{AnnotatedSentence, ChunkSpan, Corpus};
use crate::error::{Error, Result};
use crate::pattern::{compile_flat, find_sites, parse_pattern, SentenceView, SequencePattern};

pub use diff::{diff_rule_lists, RuleListDelta, SentenceDelta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleAction {
    Add,
    Kill,
    Transform,
    Merge,
}

impl RuleAction {
    pub fn letter(self) -> char {
        match self {
            RuleAction::Add => 'A',
            RuleAction::Kill => 'K',
            RuleAction::Transform => 'T',
            RuleAction::Merge => 'M',
        }
    }

    fn from_letter(s: &str) -> Option<Self> {
        match s {
            "A" => Some(RuleAction::Add),
            "K" => Some(RuleAction::Kill),
            "T" => Some(RuleAction::Transform),
            "M" => Some(RuleAction::Merge),
            _ => None,
        }
    }
}

impl fmt::Display for RuleAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleAction::Add => "Add",
            RuleAction::Kill => "Kill",
            RuleAction::Transform => "Transform",
            RuleAction::Merge => "Merge",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub action: RuleAction,
    pub before: SequencePattern,
    pub target: SequencePattern,
    pub after: SequencePattern,
    /// The text the rule was parsed from, without trailing newlines.
    pub source_text: String,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.action == other.action
            && self.before == other.before
            && self.target == other.target
            && self.after == other.after
    }
}

impl Rule {
    /// Builds a rule from parsed parts; `source_text` is rendered canonically.
    pub fn new(
        action: RuleAction,
        before: SequencePattern,
        target: SequencePattern,
        after: SequencePattern,
    ) -> Result<Self> {
        if target.min_len() == 0 {
            return Err(Error::EmptyTarget);
        }
        let show = |p: &SequencePattern| {
            if p.is_empty() {
                "-".to_string()
            } else {
                p.to_string()
            }
        };
        let source_text = format!(
            "{}\n{}\n{}\n{}",
            action.letter(),
            show(&before),
            show(&target),
            show(&after)
        );
        Ok(Rule {
            action,
            before,
            target,
            after,
            source_text,
        })
    }

    pub fn sites(&self, sentence: &AnnotatedSentence) -> Vec<crate::pattern::MatchSite> {
        find_sites(&self.before, &self.target, &self.after, &SentenceView::new(sentence))
            .expect("rule targets are validated non-empty at construction")
    }

    pub fn compile_flat(&self) -> Result<String> {
        compile_flat(&self.before, &self.target, &self.after)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source_text)
    }
}

/// Parses one rule block. Line numbers in errors are 1-based within `text`.
pub fn parse_rule(text: &str) -> Result<Rule> {
    let text = text.trim_end_matches(['\n', '\r']);
    let mut lines = text.lines().enumerate();
    let (_, action_line) = lines.next().ok_or_else(|| Error::Rule {
        line: 1,
        message: "empty rule".into(),
    })?;
    let action = RuleAction::from_letter(action_line.trim()).ok_or_else(|| Error::Rule {
        line: 1,
        message: format!("unknown action {:?} (expected A, K, T or M)", action_line.trim()),
    })?;

    // (first line number, accumulated text) per pattern
    let mut patterns: Vec<(usize, String)> = Vec::new();
    for (i, line) in lines {
        let continues = line.starts_with(char::is_whitespace) && !line.trim().is_empty();
        match patterns.last_mut() {
            Some((_, acc)) if continues => {
                acc.push('\n');
                acc.push_str(line);
            }
            _ => patterns.push((i + 1, line.to_string())),
        }
    }
    if patterns.len() != 3 {
        return Err(Error::Rule {
            line: patterns.last().map_or(1, |(l, _)| *l),
            message: format!(
                "expected before, target and after pattern lines, found {}",
                patterns.len()
            ),
        });
    }
    let mut parsed = Vec::with_capacity(3);
    for (line, body) in &patterns {
        let pattern = if body.trim() == "-" {
            SequencePattern::empty()
        } else {
            parse_pattern(body).map_err(|e| Error::Rule {
                line: *line,
                message: e.to_string(),
            })?
        };
        parsed.push(pattern);
    }
    let after = parsed.pop().unwrap();
    let target = parsed.pop().unwrap();
    let before = parsed.pop().unwrap();
    if target.min_len() == 0 {
        return Err(Error::Rule {
            line: patterns[1].0,
            message: Error::EmptyTarget.to_string(),
        });
    }
    Ok(Rule {
        action,
        before,
        target,
        after,
        source_text: text.to_string(),
    })
}

/// An ordered rule list with an edit counter.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleList {
    pub rules: Vec<Rule>,
    pub version: u64,
}

impl Default for RuleList {
    fn default() -> Self {
        RuleList {
            rules: Vec::new(),
            version: 1,
        }
    }
}

impl RuleList {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleList { rules, version: 1 }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn insert(&mut self, index: usize, rule: Rule) {
        self.rules.insert(index, rule);
        self.version += 1;
    }

    pub fn remove(&mut self, index: usize) -> Rule {
        self.version += 1;
        self.rules.remove(index)
    }

    pub fn replace(&mut self, index: usize, rule: Rule) -> Rule {
        self.version += 1;
        std::mem::replace(&mut self.rules[index], rule)
    }

    pub fn push(&mut self, rule: Rule) {
        let at = self.rules.len();
        self.insert(at, rule);
    }

    /// Rule blocks separated by one blank line. Files written this way parse
    /// back to the same text.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&rule.source_text);
            out.push('\n');
        }
        out
    }
}

/// Parses a rule file: blocks separated by blank lines, `#` lines ignored.
/// Errors name the 1-based index of the first malformed rule.
pub fn parse_rule_list(text: &str) -> Result<RuleList> {
    let mut blocks: Vec<String> = Vec::new();
    let mut current = String::new();
    for line in text.lines() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if !current.is_empty() {
                blocks.push(std::mem::take(&mut current));
            }
            continue;
        }
        if !current.is_empty() {
            current.push('\n');
        }
        current.push_str(line);
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    let rules = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| {
            parse_rule(b).map_err(|e| Error::RuleList {
                index: i + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RuleList::new(rules))
}

/// Applies one rule to a sentence in a single pass. Sites are found against
/// the annotation as it was before the rule; each is then applied in order
/// and silently skipped if its action's precondition no longer holds.
pub fn apply_rule(rule: &Rule, sentence: &AnnotatedSentence) -> AnnotatedSentence {
    let sites = rule.sites(sentence);
    if sites.is_empty() {
        return sentence.clone();
    }
    let mut spans = sentence.spans().to_vec();
    for site in sites {
        apply_action(rule.action, site.target, &mut spans);
    }
    let mut out = sentence.clone();
    out.set_spans_unchecked(spans);
    out
}

fn apply_action(action: RuleAction, target: ChunkSpan, spans: &mut Vec<ChunkSpan>) {
    let hits: Vec<usize> = spans
        .iter()
        .enumerate()
        .filter(|(_, s)| s.intersects(&target))
        .map(|(i, _)| i)
        .collect();
    match action {
        RuleAction::Add => {
            if hits.is_empty() {
                spans.push(target);
            }
        }
        RuleAction::Kill => {
            if let [i] = hits[..] {
                if spans[i] == target {
                    spans.remove(i);
                }
            }
        }
        RuleAction::Transform => {
            if let [i] = hits[..] {
                spans[i] = target;
            }
        }
        RuleAction::Merge => {
            if let [i, j] = hits[..] {
                let (a, b) = if spans[i].start < spans[j].start {
                    (spans[i], spans[j])
                } else {
                    (spans[j], spans[i])
                };
                if target.start <= a.end && target.end >= b.start {
                    spans.retain(|s| *s != a && *s != b);
                    spans.push(ChunkSpan::new(a.start, b.end));
                }
            }
        }
    }
    spans.sort_unstable();
}

pub fn apply_rule_list_to_sentence(list: &RuleList, sentence: &AnnotatedSentence) -> AnnotatedSentence {
    list.rules.iter().fold(sentence.clone(), |s, rule| apply_rule(rule, &s))
}

pub fn apply_rule_list(list: &RuleList, corpus: &Corpus) -> Corpus {
    Corpus {
        label: corpus.label.clone(),
        sentences: corpus
            .sentences
            .iter()
            .map(|s| apply_rule_list_to_sentence(list, s))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_slash;

    pub(crate) const EXAMPLE_RULE: &str = "A\n(* .)\n({1} t=DT) (* t=JJ[RS]?) (+ t=NNP?S?) \n({1} t=VB[DGNPZ]?)\n";

    fn sentence(text: &str) -> AnnotatedSentence {
        parse_slash(text, "t").unwrap().sentences.remove(0)
    }

    fn rule(text: &str) -> Rule {
        parse_rule(text).unwrap()
    }

    #[test]
    fn parses_example_rule() {
        let r = rule(EXAMPLE_RULE);
        assert_eq!(r.action, RuleAction::Add);
        assert_eq!(r.before.to_string(), "(* .)");
        assert_eq!(r.target.elements.len(), 3);
        assert_eq!(r.after.to_string(), "({1} t=VB[DGNPZ]?)");
    }

    #[test]
    fn parses_kill_with_empty_contexts() {
        let r = rule("K\n-\n({1} c=I)\n-");
        assert_eq!(r.action, RuleAction::Kill);
        assert!(r.before.is_empty() && r.after.is_empty());
    }

    #[test]
    fn rule_errors() {
        let err = parse_rule("X\n-\n(. )\n-").unwrap_err();
        assert!(matches!(err, Error::Rule { line: 1, .. }), "{err}");
        let err = parse_rule("A\n-\n({1} t=DT\n-").unwrap_err();
        assert!(matches!(err, Error::Rule { line: 3, .. }), "{err}");
        assert!(parse_rule("A\n-\n({1} t=DT)").is_err());
        assert!(parse_rule("A\n-\n(* t=DT)\n-").is_err());
    }

    #[test]
    fn continuation_lines() {
        let r = rule("A\n-\n({1} t=DT)\n  (+ t=NN)\n-");
        assert_eq!(r.target.elements.len(), 2);
    }

    #[test]
    fn rule_list_parsing() {
        let text = format!("# my rules\n{EXAMPLE_RULE}\n\n\nK\n-\n({{1}} c=I)\n-\n");
        let list = parse_rule_list(&text).unwrap();
        assert_eq!(list.len(), 2);
        assert_eq!(list.version, 1);
        assert!(parse_rule_list("").unwrap().is_empty());
        let bad = format!("{EXAMPLE_RULE}\nQ\n-\n({{1}} .)\n-\n");
        assert!(matches!(parse_rule_list(&bad), Err(Error::RuleList { index: 2, .. })));
    }

    #[test]
    fn rule_list_text_round_trips() {
        let text = "A\n(* .)\n({1} t=DT) (+ t=NN)\n-\n\nK\n-\n({1} c=I)\n-\n";
        assert_eq!(parse_rule_list(text).unwrap().to_text(), text);
    }

    #[test]
    fn editing_bumps_version() {
        let mut list = RuleList::default();
        list.push(rule(EXAMPLE_RULE));
        list.insert(0, rule("K\n-\n({1} c=I)\n-"));
        assert_eq!(list.version, 3);
        assert_eq!(list.rules[0].action, RuleAction::Kill);
        list.remove(0);
        assert_eq!(list.version, 4);
    }

    #[test]
    fn add_example() {
        let out = apply_rule(&rule(EXAMPLE_RULE), &sentence("The/DT quick/JJ fox/NN jumped/VBD"));
        assert_eq!(out.spans(), &[ChunkSpan::new(0, 3)]);
    }

    #[test]
    fn kill_exact_span() {
        let s = sentence("( 1/CD 3/8/CD ) to/TO");
        let out = apply_rule(&rule("K\n-\n({1} t=CD) ({1} t=CD)\n-"), &s);
        assert!(out.spans().is_empty());
        // no exact coincidence, nothing happens
        let s = sentence("( 1/CD 3/8/CD to/TO )");
        assert_eq!(apply_rule(&rule("K\n-\n({1} t=CD) ({1} t=CD)\n-"), &s), s);
    }

    #[test]
    fn add_skips_overlap() {
        let s = sentence("The/DT ( quick/JJ fox/NN ) jumped/VBD");
        assert_eq!(apply_rule(&rule(EXAMPLE_RULE), &s), s);
    }

    #[test]
    fn transform_extends() {
        let s = sentence("The/DT ( quick/JJ fox/NN ) jumped/VBD");
        let out = apply_rule(&rule("T\n-\n({1} t=DT) (+ t=JJ|NN)\n-"), &s);
        assert_eq!(out.spans(), &[ChunkSpan::new(0, 3)]);
        // intersecting two spans: skipped
        let s = sentence("( a/DT ) ( b/NN )");
        assert_eq!(apply_rule(&rule("T\n-\n({1} t=DT) ({1} t=NN)\n-"), &s), s);
    }

    #[test]
    fn merge_adjacent_and_gapped() {
        let s = sentence("( a/NN ) ( b/NN ) c/VBD");
        let out = apply_rule(&rule("M\n-\n({2} t=NN)\n-"), &s);
        assert_eq!(out.spans(), &[ChunkSpan::new(0, 2)]);
        let s = sentence("( a/NN ) of/IN ( b/NN )");
        let out = apply_rule(&rule("M\n-\n({1} t=NN) ({1} t=IN) ({1} t=NN)\n-"), &s);
        assert_eq!(out.spans(), &[ChunkSpan::new(0, 3)]);
        // gap token not covered by the target
        let out = apply_rule(&rule("M\n-\n({1} t=NN)\n-"), &s);
        assert_eq!(out, s);
    }

    #[test]
    fn rule_list_examples() {
        let corpus = parse_slash("The/DT quick/JJ fox/NN jumped/VBD\n( a/DT dog/NN ) barked/VBD\n", "c").unwrap();
        assert_eq!(apply_rule_list(&RuleList::default(), &corpus), corpus);

        let list = parse_rule_list("A\n-\n(+ t=NN)\n-\n\nK\n-\n(+ c=I)\n-\n").unwrap();
        // Kill only removes exact coincidences; "+ c=I" covers whole spans here
        assert_eq!(apply_rule_list(&list, &corpus.stripped()).span_count(), 0);

        let single = RuleList::new(vec![rule(EXAMPLE_RULE)]);
        let raw = corpus.stripped();
        let out = apply_rule_list(&single, &raw);
        for (a, b) in out.sentences.iter().zip(&raw.sentences) {
            assert_eq!(a, &apply_rule(&single.rules[0], b));
        }
    }
}
