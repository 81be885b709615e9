//! Quantified patterns over tagged tokens.
//!
//! A pattern is a whitespace-separated sequence of parenthesized elements,
//! each a quantifier followed by one or more constraints that must all hold
//! for a token:
//!
//! ```text
//! ({1} t=DT) (* t=JJ[RS]?) (+ t=NNP?S?)
//! ```
//!
//! Quantifiers are `{n}` (n >= 1), `*` and `+`. Constraints:
//!
//! | atom    | meaning                                                  |
//! |---------|----------------------------------------------------------|
//! | `.`     | any token                                                |
//! | `t=RE`  | POS tag matches `RE` in full                             |
//! | `w=RE`  | word matches `RE` in full                                |
//! | `c=X`   | current chunk tag of the token is `X` (I, O or B)        |
//! | `^`/`$` | sentence start / end; consumes nothing, `{1}` only, alone |

mod compile;
mod matcher;

use std::fmt;

use regex::Regex;

use crate::corpus::ChunkTag;
use crate::error::{Error, Result};

pub use compile::compile_flat;
pub use matcher::{find_sites, match_segment, Anchor, Extent, MatchSite, SentenceView};

/// A regular expression matched against a whole word or tag.
#[derive(Debug, Clone)]
pub struct AnchoredRegex {
    source: String,
    regex: Regex,
}

impl AnchoredRegex {
    pub fn new(source: &str) -> Result<Self> {
        // validate the expression on its own so errors point at what the user wrote
        Regex::new(source).map_err(|e| Error::InvalidRegex {
            expr: source.to_string(),
            source: e,
        })?;
        let regex = Regex::new(&format!("^(?:{source})$")).map_err(|e| Error::InvalidRegex {
            expr: source.to_string(),
            source: e,
        })?;
        Ok(AnchoredRegex {
            source: source.to_string(),
            regex,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

impl PartialEq for AnchoredRegex {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl Eq for AnchoredRegex {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Any,
    Word(AnchoredRegex),
    Tag(AnchoredRegex),
    Chunk(ChunkTag),
    SentenceStart,
    SentenceEnd,
}

impl Constraint {
    fn is_boundary(&self) -> bool {
        matches!(self, Constraint::SentenceStart | Constraint::SentenceEnd)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Any => f.write_str("."),
            Constraint::Word(r) => write!(f, "w={}", r.source()),
            Constraint::Tag(r) => write!(f, "t={}", r.source()),
            Constraint::Chunk(c) => write!(f, "c={c}"),
            Constraint::SentenceStart => f.write_str("^"),
            Constraint::SentenceEnd => f.write_str("$"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exactly(u32),
    Star,
    Plus,
}

impl Quantifier {
    pub fn min(self) -> usize {
        match self {
            Quantifier::Exactly(n) => n as usize,
            Quantifier::Star => 0,
            Quantifier::Plus => 1,
        }
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantifier::Exactly(n) => write!(f, "{{{n}}}"),
            Quantifier::Star => f.write_str("*"),
            Quantifier::Plus => f.write_str("+"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternElement {
    pub quantifier: Quantifier,
    pub constraints: Vec<Constraint>,
}

impl PatternElement {
    /// `^` or `$`: asserts a sentence edge without consuming a token.
    pub fn boundary(&self) -> Option<&Constraint> {
        self.constraints.first().filter(|c| c.is_boundary())
    }

    /// Minimum number of tokens the element consumes.
    pub fn min_len(&self) -> usize {
        if self.boundary().is_some() {
            0
        } else {
            self.quantifier.min()
        }
    }
}

impl fmt::Display for PatternElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.quantifier)?;
        for c in &self.constraints {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SequencePattern {
    pub elements: Vec<PatternElement>,
}

impl SequencePattern {
    pub fn empty() -> Self {
        SequencePattern::default()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn min_len(&self) -> usize {
        self.elements.iter().map(PatternElement::min_len).sum()
    }

    /// The pattern without its leading `*` elements. A star can always match
    /// the empty extent, so in a before-context those elements constrain
    /// nothing.
    pub fn without_leading_stars(&self) -> SequencePattern {
        let skip = self
            .elements
            .iter()
            .take_while(|e| e.quantifier == Quantifier::Star && e.boundary().is_none())
            .count();
        SequencePattern {
            elements: self.elements[skip..].to_vec(),
        }
    }
}

impl fmt::Display for SequencePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for SequencePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_pattern(s)
    }
}

pub fn parse_pattern(text: &str) -> Result<SequencePattern> {
    Parser { text, pos: 0 }.pattern()
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::PatternSyntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn pattern(&mut self) -> Result<SequencePattern> {
        let mut elements = Vec::new();
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                break;
            }
            elements.push(self.element()?);
        }
        Ok(SequencePattern { elements })
    }

    fn element(&mut self) -> Result<PatternElement> {
        let open = self.pos;
        if !self.eat('(') {
            return self.err("expected '('");
        }
        self.skip_ws();
        let quantifier = self.quantifier()?;
        let mut constraints = Vec::new();
        loop {
            let before = self.pos;
            self.skip_ws();
            if self.eat(')') {
                break;
            }
            if self.peek().is_none() {
                self.pos = open;
                return self.err("unclosed element");
            }
            if before == self.pos && !constraints.is_empty() {
                return self.err("expected whitespace between constraints");
            }
            constraints.push(self.constraint()?);
        }
        if constraints.is_empty() {
            self.pos = open;
            return self.err("element has no constraint");
        }
        if constraints.iter().any(Constraint::is_boundary) {
            if constraints.len() != 1 {
                self.pos = open;
                return self.err("'^' and '$' must stand alone in their element");
            }
            if quantifier != Quantifier::Exactly(1) {
                self.pos = open;
                return self.err("'^' and '$' only take the {1} quantifier");
            }
        }
        Ok(PatternElement {
            quantifier,
            constraints,
        })
    }

    fn quantifier(&mut self) -> Result<Quantifier> {
        if self.eat('*') {
            return Ok(Quantifier::Star);
        }
        if self.eat('+') {
            return Ok(Quantifier::Plus);
        }
        if self.eat('{') {
            let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
            let start = self.pos;
            self.pos += digits.len();
            if !self.eat('}') {
                return self.err("expected '}' after repetition count");
            }
            return match digits.parse::<u32>() {
                Ok(n) if n >= 1 => Ok(Quantifier::Exactly(n)),
                _ => {
                    self.pos = start;
                    self.err("repetition count must be an integer >= 1")
                }
            };
        }
        self.err("expected quantifier '{n}', '*' or '+'")
    }

    fn constraint(&mut self) -> Result<Constraint> {
        let start = self.pos;
        if self.eat('.') {
            return Ok(Constraint::Any);
        }
        if self.eat('^') {
            return Ok(Constraint::SentenceStart);
        }
        if self.eat('$') {
            return Ok(Constraint::SentenceEnd);
        }
        let rest = self.rest();
        let kind = if rest.starts_with("t=") {
            't'
        } else if rest.starts_with("w=") {
            'w'
        } else if rest.starts_with("c=") {
            'c'
        } else {
            return self.err("expected '.', '^', '$', 't=', 'w=' or 'c='");
        };
        self.pos += 2;
        let expr = self.regex_text();
        if expr.is_empty() {
            return self.err("empty constraint value");
        }
        match kind {
            'c' => match expr.parse::<ChunkTag>() {
                Ok(tag) => Ok(Constraint::Chunk(tag)),
                Err(_) => {
                    self.pos = start;
                    self.err("chunk constraint must be c=I, c=O or c=B")
                }
            },
            't' => Ok(Constraint::Tag(AnchoredRegex::new(expr)?)),
            _ => Ok(Constraint::Word(AnchoredRegex::new(expr)?)),
        }
    }

    /// Consumes a regex up to whitespace or the `)` closing the element,
    /// honoring escapes, character classes and nested groups.
    fn regex_text(&mut self) -> &str {
        let start = self.pos;
        let mut depth = 0usize;
        let mut in_class = false;
        let mut chars = self.rest().char_indices().peekable();
        let mut end = self.rest().len();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    chars.next();
                }
                '[' if !in_class => in_class = true,
                ']' if in_class => in_class = false,
                '(' if !in_class => depth += 1,
                ')' if !in_class => {
                    if depth == 0 {
                        end = i;
                        break;
                    }
                    depth -= 1;
                }
                c if c.is_whitespace() && !in_class && depth == 0 => {
                    end = i;
                    break;
                }
                _ => {}
            }
        }
        self.pos = start + end;
        &self.text[start..self.pos]
    }
}
