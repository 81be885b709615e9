//! Greedy error-driven rule learning.
//!
//! Each round instantiates every template at every position whose current tag
//! is wrong, with `to` set to the gold tag there. A candidate's gain is the
//! number of positions it fixes minus the number of correct positions it
//! would break. Both counts come from one sweep: error positions add to the
//! "good" count of the candidate they generate, and correct positions add to
//! the "bad" count of every generated candidate whose conditions and `from`
//! tag they satisfy.

use rustc_hash::FxHashMap;

use super::{
    apply_baseline, apply_tbl_rule, baseline_map, count_errors, BaselineMap, Condition, Feature, FeatureValue,
    LearnerConfig, TaggedSentence, TblModel, TblRule, Template,
};
use crate::corpus::{ChunkTag, Corpus};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedRule {
    pub rule: TblRule,
    pub gain: u32,
    pub errors_before: usize,
    pub errors_after: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnOutcome {
    pub baseline: BaselineMap,
    pub rules: Vec<LearnedRule>,
    pub baseline_errors: usize,
}

impl LearnOutcome {
    pub fn model(&self) -> TblModel {
        TblModel {
            baseline: self.baseline.clone(),
            rules: self.rules.iter().map(|r| r.rule.clone()).collect(),
        }
    }
}

const TAGS: [ChunkTag; 3] = [ChunkTag::I, ChunkTag::O, ChunkTag::B];

fn tag_of(i: u8) -> ChunkTag {
    TAGS[i as usize]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    template: u16,
    from: u8,
    values: [u32; Template::MAX_SLOTS],
}

#[derive(Default)]
struct Counts {
    good: [u32; 3],
    bad: u32,
}

/// The training state flattened into parallel arrays with interned strings.
struct State {
    words: Vec<u32>,
    pos: Vec<u32>,
    current: Vec<u8>,
    truth: Vec<u8>,
    // sentence bounds of each position
    lo: Vec<u32>,
    hi: Vec<u32>,
    word_names: Vec<String>,
    pos_names: Vec<String>,
}

impl State {
    fn new(tagged: &[TaggedSentence], gold: &[Vec<ChunkTag>]) -> Self {
        let mut word_ids: FxHashMap<&str, u32> = FxHashMap::default();
        let mut pos_ids: FxHashMap<&str, u32> = FxHashMap::default();
        let mut st = State {
            words: Vec::new(),
            pos: Vec::new(),
            current: Vec::new(),
            truth: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            word_names: Vec::new(),
            pos_names: Vec::new(),
        };
        for (s, g) in tagged.iter().zip(gold) {
            let lo = st.words.len() as u32;
            let hi = lo + s.tokens.len() as u32;
            for (i, t) in s.tokens.iter().enumerate() {
                let next = word_ids.len() as u32;
                let w = *word_ids.entry(t.word()).or_insert_with(|| {
                    st.word_names.push(t.word().to_string());
                    next
                });
                let next = pos_ids.len() as u32;
                let p = *pos_ids.entry(t.pos()).or_insert_with(|| {
                    st.pos_names.push(t.pos().to_string());
                    next
                });
                st.words.push(w);
                st.pos.push(p);
                st.current.push(s.chunk_tags[i].index() as u8);
                st.truth.push(g[i].index() as u8);
                st.lo.push(lo);
                st.hi.push(hi);
            }
        }
        st
    }

    fn value(&self, feature: Feature, at: usize) -> u32 {
        match feature {
            Feature::Word => self.words[at],
            Feature::Pos => self.pos[at],
            Feature::Chunk => self.current[at] as u32,
        }
    }

    /// Instantiates a template at a position; `None` if a slot falls outside
    /// the sentence.
    fn key(&self, template: u16, slots: &[(i8, Feature)], at: usize) -> Option<Key> {
        let mut values = [0u32; Template::MAX_SLOTS];
        for (v, &(offset, feature)) in values.iter_mut().zip(slots) {
            let j = at as i64 + offset as i64;
            if j < self.lo[at] as i64 || j >= self.hi[at] as i64 {
                return None;
            }
            *v = self.value(feature, j as usize);
        }
        Some(Key {
            template,
            from: self.current[at],
            values,
        })
    }

    fn decode(&self, key: &Key, to: u8, templates: &[Template]) -> TblRule {
        let slots = templates[key.template as usize].slots();
        let conditions = slots
            .iter()
            .zip(key.values)
            .map(|(&(offset, feature), v)| {
                let value = match feature {
                    Feature::Word => FeatureValue::Word(self.word_names[v as usize].clone()),
                    Feature::Pos => FeatureValue::Pos(self.pos_names[v as usize].clone()),
                    Feature::Chunk => FeatureValue::Chunk(tag_of(v as u8)),
                };
                Condition::new(offset, value)
            })
            .collect();
        TblRule {
            from: tag_of(key.from),
            to: tag_of(to),
            conditions,
        }
    }

    fn errors(&self) -> usize {
        self.current.iter().zip(&self.truth).filter(|(a, b)| a != b).count()
    }

    fn fires(&self, key: &Key, slots: &[(i8, Feature)], at: usize) -> bool {
        self.current[at] == key.from && self.key(key.template, slots, at).as_ref() == Some(key)
    }
}

/// Ordering among equal-gain candidates: template index, then `from`, then
/// the decoded slot values, then `to`.
fn tie_key(state: &State, key: &Key, to: u8, templates: &[Template]) -> (u16, u8, Vec<String>, u8) {
    let slots = templates[key.template as usize].slots();
    let values = slots
        .iter()
        .zip(key.values)
        .map(|(&(_, feature), v)| match feature {
            Feature::Word => state.word_names[v as usize].clone(),
            Feature::Pos => state.pos_names[v as usize].clone(),
            Feature::Chunk => tag_of(v as u8).as_str().to_string(),
        })
        .collect();
    (key.template, key.from, values, to)
}

/// Learns an ordered rule list on gold-annotated training data.
pub fn learn(train: &Corpus, cfg: &LearnerConfig) -> Result<LearnOutcome> {
    let baseline = baseline_map(train)?;
    let tagged = apply_baseline(&baseline, train);
    let gold: Vec<Vec<ChunkTag>> = train.sentences.iter().map(|s| s.iob_tags()).collect();
    let baseline_errors = count_errors(&tagged, &gold);
    let mut state = State::new(&tagged, &gold);
    let templates = &cfg.templates;
    let mut rules = Vec::new();
    let n = state.words.len();

    while rules.len() < cfg.max_rules {
        let mut counts: FxHashMap<Key, Counts> = FxHashMap::default();
        for at in 0..n {
            if state.current[at] == state.truth[at] {
                continue;
            }
            for (t, template) in templates.iter().enumerate() {
                if let Some(key) = state.key(t as u16, template.slots(), at) {
                    counts.entry(key).or_default().good[state.truth[at] as usize] += 1;
                }
            }
        }
        if counts.is_empty() {
            break;
        }
        for at in 0..n {
            if state.current[at] != state.truth[at] {
                continue;
            }
            for (t, template) in templates.iter().enumerate() {
                if let Some(key) = state.key(t as u16, template.slots(), at) {
                    if let Some(c) = counts.get_mut(&key) {
                        c.bad += 1;
                    }
                }
            }
        }

        let mut best_gain = i64::MIN;
        let mut best: Vec<(Key, u8)> = Vec::new();
        for (key, c) in &counts {
            for to in 0..3u8 {
                if to == key.from || c.good[to as usize] == 0 {
                    continue;
                }
                let gain = c.good[to as usize] as i64 - c.bad as i64;
                if gain > best_gain {
                    best_gain = gain;
                    best.clear();
                }
                if gain == best_gain {
                    best.push((*key, to));
                }
            }
        }
        if best_gain < cfg.min_gain as i64 {
            break;
        }
        let (key, to) = best
            .into_iter()
            .min_by_key(|(k, to)| tie_key(&state, k, *to, templates))
            .expect("a best candidate exists");

        let slots = templates[key.template as usize].slots();
        let errors_before = state.errors();
        let fired: Vec<usize> = (0..n).filter(|&at| state.fires(&key, slots, at)).collect();
        for at in fired {
            state.current[at] = to;
        }
        let errors_after = state.errors();
        rules.push(LearnedRule {
            rule: state.decode(&key, to, templates),
            gain: best_gain as u32,
            errors_before,
            errors_after,
        });
    }

    Ok(LearnOutcome {
        baseline,
        rules,
        baseline_errors,
    })
}

/// Replays a learned rule list on the training data with the slow,
/// structure-level matcher and returns the error count after each rule.
pub fn replay_errors(outcome: &LearnOutcome, train: &Corpus) -> Vec<usize> {
    let mut tagged = apply_baseline(&outcome.baseline, train);
    let gold: Vec<Vec<ChunkTag>> = train.sentences.iter().map(|s| s.iob_tags()).collect();
    let mut out = vec![count_errors(&tagged, &gold)];
    for r in &outcome.rules {
        for s in &mut tagged {
            apply_tbl_rule(&r.rule, s);
        }
        out.push(count_errors(&tagged, &gold));
    }
    out
}
