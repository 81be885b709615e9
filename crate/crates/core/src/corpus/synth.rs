//! Seeded synthetic corpora for tests and benchmarks.
//!
//! Sentences follow a small clause grammar whose base NPs are always
//! `DT JJ* NN+` (nouns singular or plural). Objects may follow each other
//! directly ("gave the dog a bone"), which exercises chunk-boundary tags,
//! and adjectives also occur predicatively outside any NP ("is happy").
//! With probability `noise` each token's POS tag is replaced by a random
//! tag while the gold bracketing is kept, so a perfect score is not
//! reachable from tags alone.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AnnotatedSentence, ChunkSpan, Corpus, Token};

const DT: &[&str] = &["the", "a", "this", "every", "that", "some"];
const JJ: &[&str] = &["old", "big", "quick", "red", "happy", "quiet", "bright", "small"];
const NN: &[&str] = &[
    "dog", "market", "cat", "price", "bank", "city", "stock", "report", "man", "share",
];
const NNS: &[&str] = &[
    "dogs", "markets", "prices", "banks", "stocks", "reports", "shares", "men",
];
const VBD: &[&str] = &["saw", "bought", "sold", "gave", "sent", "found"];
const VBZ: &[&str] = &["is", "seems", "looks"];
const IN: &[&str] = &["in", "of", "near", "with", "for"];
const RB: &[&str] = &["today", "quickly", "again", "also"];
const NOISE_TAGS: &[&str] = &["DT", "JJ", "NN", "NNS", "VBD", "VBZ", "IN", "RB", "CC"];

struct Builder<'r> {
    rng: &'r mut ChaCha8Rng,
    words: Vec<(String, String)>,
    spans: Vec<ChunkSpan>,
}

impl Builder<'_> {
    fn word(&mut self, list: &[&str], tag: &str) {
        let w = list.choose(self.rng).expect("word lists are non-empty");
        self.words.push((w.to_string(), tag.to_string()));
    }

    fn np(&mut self) {
        let start = self.words.len();
        self.word(DT, "DT");
        while self.rng.random_bool(0.35) {
            self.word(JJ, "JJ");
        }
        let plural = self.rng.random_bool(0.3);
        loop {
            if plural {
                self.word(NNS, "NNS");
            } else {
                self.word(NN, "NN");
            }
            if !self.rng.random_bool(0.25) {
                break;
            }
        }
        self.spans.push(ChunkSpan::new(start, self.words.len()));
    }
}

/// Generates `sentences` sentences deterministically from `seed`.
pub fn synthetic_corpus(sentences: usize, seed: u64, noise: f64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let mut b = Builder {
            rng: &mut rng,
            words: Vec::new(),
            spans: Vec::new(),
        };
        b.np();
        match b.rng.random_range(0..4) {
            0 => {
                b.word(VBZ, "VBZ");
                b.word(JJ, "JJ");
            }
            1 => {
                b.word(VBD, "VBD");
                b.np();
                b.np();
            }
            _ => {
                b.word(VBD, "VBD");
                b.np();
            }
        }
        while b.rng.random_bool(0.4) {
            b.word(IN, "IN");
            b.np();
        }
        if b.rng.random_bool(0.3) {
            b.word(RB, "RB");
        }
        b.words.push((".".to_string(), ".".to_string()));
        let Builder { words, spans, .. } = b;
        let tokens = words
            .into_iter()
            .map(|(w, mut t)| {
                if rng.random_bool(noise) {
                    t = NOISE_TAGS.choose(&mut rng).expect("non-empty").to_string();
                }
                Token::new(w, t).expect("generated tokens are valid")
            })
            .collect();
        out.push(AnnotatedSentence::new(tokens, spans).expect("generated spans are valid"));
    }
    Corpus::new(format!("synthetic-{seed}"), out)
}
