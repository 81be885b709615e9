use serde::Serialize;

use super::{Constraint, PatternElement, Quantifier, SequencePattern};
use crate::corpus::{AnnotatedSentence, ChunkSpan, ChunkTag, Token};
use crate::error::{Error, Result};

/// Token range `[start, end)` that may be empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Extent {
    pub start: usize,
    pub end: usize,
}

impl Extent {
    pub const fn new(start: usize, end: usize) -> Self {
        Extent { start, end }
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Left,
    Right,
}

/// One application point of a three-part rule: the bracketed target plus the
/// extents its before- and after-contexts consumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MatchSite {
    pub before: Extent,
    pub target: ChunkSpan,
    pub after: Extent,
}

impl MatchSite {
    /// `[before.start, after.end)`.
    pub fn full_extent(&self) -> Extent {
        Extent::new(self.before.start, self.after.end)
    }
}

/// Tokens plus their current chunk tags, which `c=` atoms read.
#[derive(Debug, Clone)]
pub struct SentenceView<'a> {
    tokens: &'a [Token],
    chunks: Vec<ChunkTag>,
}

impl<'a> SentenceView<'a> {
    pub fn new(sentence: &'a AnnotatedSentence) -> Self {
        SentenceView {
            tokens: sentence.tokens(),
            chunks: sentence.iob_tags(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    fn accepts(&self, element: &PatternElement, i: usize) -> bool {
        element.constraints.iter().all(|c| match c {
            Constraint::Any => true,
            Constraint::Word(r) => r.is_match(self.tokens[i].word()),
            Constraint::Tag(r) => r.is_match(self.tokens[i].pos()),
            Constraint::Chunk(tag) => self.chunks[i] == *tag,
            Constraint::SentenceStart | Constraint::SentenceEnd => false,
        })
    }

    fn boundary_holds(&self, c: &Constraint, pos: usize) -> bool {
        match c {
            Constraint::SentenceStart => pos == 0,
            _ => pos == self.len(),
        }
    }

    /// Number of consecutive tokens from `pos` (below `limit`) the element accepts.
    fn run(&self, element: &PatternElement, pos: usize, limit: usize) -> usize {
        (pos..limit).take_while(|&i| self.accepts(element, i)).count()
    }

    /// Every end position reachable by matching `element` from `pos`.
    fn step(&self, element: &PatternElement, pos: usize, limit: usize, out: &mut Vec<usize>) {
        if let Some(b) = element.boundary() {
            if self.boundary_holds(b, pos) {
                out.push(pos);
            }
            return;
        }
        let run = self.run(element, pos, limit);
        match element.quantifier {
            Quantifier::Exactly(n) => {
                if run >= n as usize {
                    out.push(pos + n as usize);
                }
            }
            q => out.extend((q.min()..=run).map(|k| pos + k)),
        }
    }
}

/// All extents inside `region` matching `pattern` and flush against the
/// anchored edge, sorted.
pub fn match_segment(
    pattern: &SequencePattern,
    view: &SentenceView<'_>,
    region: Extent,
    anchor: Anchor,
) -> Vec<Extent> {
    let reachable_from = |start: usize| {
        let mut current = vec![start];
        for element in &pattern.elements {
            let mut next = Vec::new();
            for &pos in &current {
                view.step(element, pos, region.end, &mut next);
            }
            next.sort_unstable();
            next.dedup();
            current = next;
            if current.is_empty() {
                break;
            }
        }
        current
    };
    match anchor {
        Anchor::Left => reachable_from(region.start)
            .into_iter()
            .map(|end| Extent::new(region.start, end))
            .collect(),
        Anchor::Right => (region.start..=region.end)
            .filter(|&s| reachable_from(s).contains(&region.end))
            .map(|s| Extent::new(s, region.end))
            .collect(),
    }
}

/// Backtracking matcher with the priority order of a greedy regex engine:
/// `*`/`+` try the longest run first, then give back one token at a time.
struct Backtracker<'v, 'a> {
    view: &'v SentenceView<'a>,
    elements: Vec<&'v PatternElement>,
    // (element index, position) pairs already known to fail
    failed: Vec<bool>,
    ends: Vec<usize>,
}

impl<'v, 'a> Backtracker<'v, 'a> {
    fn new(view: &'v SentenceView<'a>, elements: Vec<&'v PatternElement>) -> Self {
        let states = (elements.len() + 1) * (view.len() + 1);
        Backtracker {
            view,
            elements,
            failed: vec![false; states],
            ends: Vec::new(),
        }
    }

    fn run_from(&mut self, start: usize) -> bool {
        self.ends.clear();
        self.go(0, start)
    }

    fn go(&mut self, idx: usize, pos: usize) -> bool {
        if idx == self.elements.len() {
            return true;
        }
        let key = idx * (self.view.len() + 1) + pos;
        if self.failed[key] {
            return false;
        }
        let element = self.elements[idx];
        let mut candidates = Vec::new();
        self.view.step(element, pos, self.view.len(), &mut candidates);
        for &end in candidates.iter().rev() {
            self.ends.push(end);
            if self.go(idx + 1, end) {
                return true;
            }
            self.ends.pop();
        }
        self.failed[key] = true;
        false
    }
}

/// Finds the application sites of a before/target/after rule, left to right.
///
/// The three patterns are matched as one concatenated sequence with greedy
/// backtracking, at the leftmost start position that succeeds. After a site
/// is recorded the scan resumes at the end of its after-context. Leading `*`
/// elements of the before-context are dropped first (they always match empty).
/// This is exactly how a global substitution of the compiled flat expression
/// behaves on the flat encoding of the sentence.
pub fn find_sites(
    before: &SequencePattern,
    target: &SequencePattern,
    after: &SequencePattern,
    view: &SentenceView<'_>,
) -> Result<Vec<MatchSite>> {
    if target.min_len() == 0 {
        return Err(Error::EmptyTarget);
    }
    let before = before.without_leading_stars();
    let nb = before.elements.len();
    let nt = target.elements.len();
    let elements: Vec<&PatternElement> = before
        .elements
        .iter()
        .chain(&target.elements)
        .chain(&after.elements)
        .collect();
    let mut bt = Backtracker::new(view, elements);
    let n = view.len();
    let mut sites = Vec::new();
    let mut start = 0;
    while start <= n {
        if !bt.run_from(start) {
            start += 1;
            continue;
        }
        let end_of = |count: usize, default: usize| {
            if count == 0 {
                default
            } else {
                bt.ends[count - 1]
            }
        };
        let target_start = end_of(nb, start);
        let target_end = end_of(nb + nt, target_start);
        let after_end = end_of(bt.ends.len(), target_end);
        sites.push(MatchSite {
            before: Extent::new(start, target_start),
            target: ChunkSpan::new(target_start, target_end),
            after: Extent::new(target_end, after_end),
        });
        start = after_end;
    }
    Ok(sites)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_slash;
    use crate::pattern::parse_pattern;

    fn sentence(text: &str) -> AnnotatedSentence {
        parse_slash(text, "t").unwrap().sentences.remove(0)
    }

    fn p(text: &str) -> SequencePattern {
        parse_pattern(text).unwrap()
    }

    const TARGET: &str = "({1} t=DT) (* t=JJ[RS]?) (+ t=NNP?S?)";
    const AFTER: &str = "({1} t=VB[DGNPZ]?)";

    #[test]
    fn segment_single_token() {
        let s = sentence("ran/VBD");
        let v = SentenceView::new(&s);
        assert_eq!(
            match_segment(&p("({1} t=VB[DGNPZ]?)"), &v, Extent::new(0, 1), Anchor::Left),
            vec![Extent::new(0, 1)]
        );
        assert!(match_segment(
            &p("({1} t=DT)"),
            &SentenceView::new(&sentence("dog/NN")),
            Extent::new(0, 1),
            Anchor::Left
        )
        .is_empty());
    }

    #[test]
    fn segment_empty_pattern() {
        let s = sentence("a/DT b/NN c/VBD");
        let v = SentenceView::new(&s);
        assert_eq!(
            match_segment(&SequencePattern::empty(), &v, Extent::new(1, 3), Anchor::Left),
            vec![Extent::new(1, 1)]
        );
        assert_eq!(
            match_segment(&SequencePattern::empty(), &v, Extent::new(1, 3), Anchor::Right),
            vec![Extent::new(3, 3)]
        );
    }

    #[test]
    fn segment_returns_every_extent() {
        let s = sentence("a/JJ b/JJ c/JJ");
        let v = SentenceView::new(&s);
        assert_eq!(
            match_segment(&p("(* t=JJ)"), &v, Extent::new(0, 3), Anchor::Right),
            vec![
                Extent::new(0, 3),
                Extent::new(1, 3),
                Extent::new(2, 3),
                Extent::new(3, 3)
            ]
        );
        assert_eq!(
            match_segment(&p("(+ t=JJ)"), &v, Extent::new(0, 2), Anchor::Left),
            vec![Extent::new(0, 1), Extent::new(0, 2)]
        );
    }

    #[test]
    fn example_rule_sites() {
        let s = sentence("The/DT quick/JJ fox/NN jumped/VBD");
        let sites = find_sites(&p("(* .)"), &p(TARGET), &p(AFTER), &SentenceView::new(&s)).unwrap();
        assert_eq!(sites.len(), 1);
        assert_eq!(sites[0].target, ChunkSpan::new(0, 3));
        assert_eq!(sites[0].after, Extent::new(3, 4));

        let s = sentence("a/DT the/DT dog/NN barked/VBD");
        let sites = find_sites(&p("(* .)"), &p(TARGET), &p(AFTER), &SentenceView::new(&s)).unwrap();
        assert_eq!(
            sites.iter().map(|s| s.target).collect::<Vec<_>>(),
            [ChunkSpan::new(1, 3)]
        );

        let s = sentence("dogs/NNS ran/VBD");
        assert!(find_sites(&p("(* .)"), &p(TARGET), &p(AFTER), &SentenceView::new(&s))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn multiple_sites_resume_after_context() {
        let s = sentence("the/DT dog/NN ran/VBD the/DT cat/NN sat/VBD");
        let sites = find_sites(&p("(* .)"), &p(TARGET), &p(AFTER), &SentenceView::new(&s)).unwrap();
        let targets: Vec<_> = sites.iter().map(|s| s.target).collect();
        assert_eq!(targets, [ChunkSpan::new(0, 2), ChunkSpan::new(3, 5)]);
    }

    #[test]
    fn before_context_is_consumed() {
        // "x" consumed as before-context of the first site cannot serve the second
        let s = sentence("x/IN a/NN b/NN");
        let sites = find_sites(
            &p("({1} t=IN|NN)"),
            &p("({1} t=NN)"),
            &SequencePattern::empty(),
            &SentenceView::new(&s),
        )
        .unwrap();
        assert_eq!(
            sites.iter().map(|s| s.target).collect::<Vec<_>>(),
            [ChunkSpan::new(1, 2)]
        );
    }

    #[test]
    fn greedy_backtracking_priority() {
        // star in the before-context eats as much as it can
        let s = sentence("a/A b/B b/B");
        let sites = find_sites(
            &p("({1} t=A) (* t=B)"),
            &p("({1} t=B)"),
            &SequencePattern::empty(),
            &SentenceView::new(&s),
        )
        .unwrap();
        assert_eq!(sites[0].target, ChunkSpan::new(2, 3));
    }

    #[test]
    fn boundaries_and_chunk_state() {
        let s = parse_slash("( the/DT dog/NN ) ran/VBD", "t")
            .unwrap()
            .sentences
            .remove(0);
        let v = SentenceView::new(&s);
        let sites = find_sites(&p("({1} ^)"), &p("(+ c=I)"), &SequencePattern::empty(), &v).unwrap();
        assert_eq!(sites[0].target, ChunkSpan::new(0, 2));
        let sites = find_sites(&SequencePattern::empty(), &p("({1} .)"), &p("({1} $)"), &v).unwrap();
        assert_eq!(sites[0].target, ChunkSpan::new(2, 3));
        assert!(
            find_sites(&p("({1} ^)"), &p("({1} t=VBD)"), &SequencePattern::empty(), &v)
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn empty_target_rejected() {
        let s = sentence("a/DT");
        let err = find_sites(
            &SequencePattern::empty(),
            &p("(* t=DT)"),
            &SequencePattern::empty(),
            &SentenceView::new(&s),
        );
        assert!(matches!(err, Err(Error::EmptyTarget)));
    }
}
