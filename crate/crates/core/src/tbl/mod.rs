//! Transformation-based chunk tagging.
//!
//! Every word starts with the chunk tag most often seen with its POS tag in
//! training. Learned rules then rewrite tags one at a time: a rule changes
//! `from` to `to` at each word whose window of up to three words either side
//! satisfies all of its conditions. A rule fires simultaneously: all firing
//! positions are found against the tags as they were before the rule, then
//! changed together.

mod learn;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::corpus::{repair_iob, AnnotatedSentence, ChunkTag, Corpus, Token};
use crate::error::{Error, Result};

pub use learn::{learn, replay_errors, LearnOutcome, LearnedRule};
pub use text::{parse_tbl_rules, parse_templates, write_tbl_rules};

/// Window half-width of the templates.
pub const WINDOW: i8 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<Token>,
    pub chunk_tags: Vec<ChunkTag>,
}

impl TaggedSentence {
    pub fn from_annotated(sentence: &AnnotatedSentence) -> Self {
        TaggedSentence {
            tokens: sentence.tokens().to_vec(),
            chunk_tags: sentence.iob_tags(),
        }
    }

    /// Repairs invalid `B` tags to `I` and converts to spans.
    pub fn to_annotated(&self) -> AnnotatedSentence {
        let mut tags = self.chunk_tags.clone();
        repair_iob(&mut tags);
        AnnotatedSentence::from_iob(self.tokens.clone(), &tags).expect("repaired tags are valid IOB")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Feature {
    Word,
    Pos,
    Chunk,
}

impl Feature {
    pub fn name(self) -> &'static str {
        match self {
            Feature::Word => "word",
            Feature::Pos => "pos",
            Feature::Chunk => "chunk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureValue {
    Word(String),
    Pos(String),
    Chunk(ChunkTag),
}

impl FeatureValue {
    pub fn feature(&self) -> Feature {
        match self {
            FeatureValue::Word(_) => Feature::Word,
            FeatureValue::Pos(_) => Feature::Pos,
            FeatureValue::Chunk(_) => Feature::Chunk,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Condition {
    pub offset: i8,
    pub value: FeatureValue,
}

impl Condition {
    pub fn new(offset: i8, value: FeatureValue) -> Self {
        Condition { offset, value }
    }

    fn holds(&self, s: &TaggedSentence, i: usize) -> bool {
        let j = i as isize + self.offset as isize;
        if j < 0 || j as usize >= s.tokens.len() {
            return false;
        }
        let j = j as usize;
        match &self.value {
            FeatureValue::Word(w) => s.tokens[j].word() == w,
            FeatureValue::Pos(p) => s.tokens[j].pos() == p,
            FeatureValue::Chunk(c) => s.chunk_tags[j] == *c,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.value.feature().name();
        match &self.value {
            FeatureValue::Word(v) | FeatureValue::Pos(v) => write!(f, "{name}[{}]={v}", self.offset),
            FeatureValue::Chunk(c) => write!(f, "{name}[{}]={c}", self.offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TblRule {
    pub from: ChunkTag,
    pub to: ChunkTag,
    pub conditions: Vec<Condition>,
}

impl TblRule {
    pub fn new(from: ChunkTag, to: ChunkTag, conditions: Vec<Condition>) -> Result<Self> {
        if from == to {
            return Err(Error::Template("rule must change the tag".into()));
        }
        if conditions.is_empty() {
            return Err(Error::Template("rule needs at least one condition".into()));
        }
        for (i, c) in conditions.iter().enumerate() {
            if c.offset.abs() > WINDOW {
                return Err(Error::Template(format!("offset {} outside the window", c.offset)));
            }
            if conditions[..i]
                .iter()
                .any(|d| d.offset == c.offset && d.value.feature() == c.value.feature())
            {
                return Err(Error::Template(format!("duplicate condition slot {c}")));
            }
        }
        Ok(TblRule { from, to, conditions })
    }
}

impl fmt::Display for TblRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "from={} to={} IF", self.from, self.to)?;
        for c in &self.conditions {
            write!(f, " {c}")?;
        }
        Ok(())
    }
}

/// The `(offset, feature)` slots a candidate rule fills in from a window.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    slots: Vec<(i8, Feature)>,
}

impl Template {
    pub const MAX_SLOTS: usize = 4;

    pub fn new(slots: Vec<(i8, Feature)>) -> Result<Self> {
        if slots.is_empty() || slots.len() > Self::MAX_SLOTS {
            return Err(Error::Template(format!(
                "a template has 1 to {} slots, got {}",
                Self::MAX_SLOTS,
                slots.len()
            )));
        }
        for (i, &(offset, feature)) in slots.iter().enumerate() {
            if offset.abs() > WINDOW {
                return Err(Error::Template(format!("offset {offset} outside the window")));
            }
            if slots[..i].contains(&(offset, feature)) {
                return Err(Error::Template(format!("duplicate slot {}[{offset}]", feature.name())));
            }
        }
        Ok(Template { slots })
    }

    pub fn slots(&self) -> &[(i8, Feature)] {
        &self.slots
    }

    /// Every single slot and every pair of slots over the window, plus the
    /// multi-slot shapes `pos[0] pos[1] chunk[-1] chunk[-2]`,
    /// `pos[0] pos[1] chunk[-1]`, `pos[-1] pos[0] pos[1]` and
    /// `chunk[-1] pos[0] chunk[1]`. `chunk[0]` is left out: it always equals
    /// the rule's `from` tag.
    pub fn default_set() -> Vec<Template> {
        let mut slots = Vec::new();
        for feature in [Feature::Word, Feature::Pos, Feature::Chunk] {
            for offset in -WINDOW..=WINDOW {
                if !(feature == Feature::Chunk && offset == 0) {
                    slots.push((offset, feature));
                }
            }
        }
        let mut out: Vec<Template> = slots.iter().map(|&s| Template { slots: vec![s] }).collect();
        for (i, &a) in slots.iter().enumerate() {
            for &b in &slots[i + 1..] {
                out.push(Template { slots: vec![a, b] });
            }
        }
        use Feature::{Chunk, Pos};
        for extra in [
            vec![(0, Pos), (1, Pos), (-1, Chunk), (-2, Chunk)],
            vec![(0, Pos), (1, Pos), (-1, Chunk)],
            vec![(-1, Pos), (0, Pos), (1, Pos)],
            vec![(-1, Chunk), (0, Pos), (1, Chunk)],
        ] {
            out.push(Template { slots: extra });
        }
        out
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (offset, feature)) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}[{offset}]", feature.name())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LearnerConfig {
    /// Learning stops once the best candidate fixes fewer net errors than this.
    pub min_gain: u32,
    pub max_rules: usize,
    pub templates: Vec<Template>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            min_gain: 2,
            max_rules: 500,
            templates: Template::default_set(),
        }
    }
}

/// Most frequent chunk tag per POS tag; unseen tags map to `O`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BaselineMap {
    pub map: BTreeMap<String, ChunkTag>,
}

impl BaselineMap {
    pub fn lookup(&self, pos: &str) -> ChunkTag {
        self.map.get(pos).copied().unwrap_or(ChunkTag::O)
    }
}

/// Counts chunk tags per POS tag over gold training data; ties go I, then O,
/// then B.
pub fn baseline_map(train: &Corpus) -> Result<BaselineMap> {
    if train.token_count() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for s in &train.sentences {
        for (t, tag) in s.tokens().iter().zip(s.iob_tags()) {
            counts.entry(t.pos()).or_default()[tag.index()] += 1;
        }
    }
    let map = counts
        .into_iter()
        .map(|(pos, c)| {
            let mut best = ChunkTag::I;
            for tag in [ChunkTag::O, ChunkTag::B] {
                if c[tag.index()] > c[best.index()] {
                    best = tag;
                }
            }
            (pos.to_string(), best)
        })
        .collect();
    Ok(BaselineMap { map })
}

pub fn apply_baseline(map: &BaselineMap, raw: &Corpus) -> Vec<TaggedSentence> {
    raw.sentences
        .iter()
        .map(|s| TaggedSentence {
            tokens: s.tokens().to_vec(),
            chunk_tags: s.tokens().iter().map(|t| map.lookup(t.pos())).collect(),
        })
        .collect()
}

pub fn rule_matches(rule: &TblRule, s: &TaggedSentence, i: usize) -> bool {
    s.chunk_tags[i] == rule.from && rule.conditions.iter().all(|c| c.holds(s, i))
}

/// Applies a rule with simultaneous firing; returns the changed positions.
pub fn apply_tbl_rule(rule: &TblRule, s: &mut TaggedSentence) -> Vec<usize> {
    let fired: Vec<usize> = (0..s.tokens.len()).filter(|&i| rule_matches(rule, s, i)).collect();
    for &i in &fired {
        s.chunk_tags[i] = rule.to;
    }
    fired
}

/// Net errors fixed by applying `rule` once to every sentence.
pub fn score_rule(rule: &TblRule, tagged: &[TaggedSentence], truth: &[Vec<ChunkTag>]) -> i64 {
    let mut gain = 0i64;
    for (s, gold) in tagged.iter().zip(truth) {
        for (i, (&current, &want)) in s.chunk_tags.iter().zip(gold).enumerate() {
            if !rule_matches(rule, s, i) {
                continue;
            }
            if rule.to == want && current != want {
                gain += 1;
            } else if current == want && rule.to != want {
                gain -= 1;
            }
        }
    }
    gain
}

/// A learned chunker: baseline map plus ordered rules.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TblModel {
    pub baseline: BaselineMap,
    pub rules: Vec<TblRule>,
}

impl TblModel {
    pub fn tag(&self, raw: &Corpus) -> Vec<TaggedSentence> {
        let mut tagged = apply_baseline(&self.baseline, raw);
        for rule in &self.rules {
            for s in &mut tagged {
                apply_tbl_rule(rule, s);
            }
        }
        tagged
    }
}

/// Baseline, then every rule in order, then IOB repair and span conversion.
pub fn apply_tbl(rules: &[TblRule], map: &BaselineMap, raw: &Corpus) -> Corpus {
    let model = TblModel {
        baseline: map.clone(),
        rules: rules.to_vec(),
    };
    Corpus::new(
        raw.label.clone(),
        model.tag(raw).iter().map(TaggedSentence::to_annotated).collect(),
    )
}

pub(crate) fn count_errors(tagged: &[TaggedSentence], truth: &[Vec<ChunkTag>]) -> usize {
    tagged
        .iter()
        .zip(truth)
        .map(|(s, g)| s.chunk_tags.iter().zip(g).filter(|(a, b)| a != b).count())
        .sum()
}
