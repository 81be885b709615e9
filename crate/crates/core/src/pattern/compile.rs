//! Translation of a rule into one flat-text substitution expression.
//!
//! Each token of the flat encoding is `word__TAG` followed by whitespace, so
//! an element `(Q t=R)` becomes `([^\s_]+__R\s+)Q` and a wildcard becomes
//! `([^\s_()]+__[^\s_]+\s+)Q`. The target is wrapped in its own capture group
//! and the replacement re-emits the contexts around a bracketed target:
//!
//! ```text
//! s{(([^\s_]+__DT\s+)([^\s_]+__JJ[RS]?\s+)*([^\s_]+__NNP?S?\s+)+)([^\s_]+__VB[DGNPZ]?\s+)}{ ( $1 ) $5 }g
//! ```

use regex::Regex;

use super::{Constraint, PatternElement, Quantifier, SequencePattern};
use crate::error::{Error, Result};

const WORD: &str = r"[^\s_]+__";
const WILDCARD: &str = r"[^\s_()]+__[^\s_]+";

struct Emitter {
    out: String,
    groups: usize,
}

impl Emitter {
    fn element(&mut self, element: &PatternElement) -> Result<()> {
        let mut tag = None;
        for c in &element.constraints {
            match c {
                Constraint::Any => {}
                Constraint::Tag(r) => {
                    if tag.replace(r).is_some() {
                        return Err(Error::UnsupportedAtom(format!("conjunction of tag atoms in {element}")));
                    }
                }
                other => return Err(Error::UnsupportedAtom(format!("atom '{other}'"))),
            }
        }
        self.groups += 1;
        self.out.push('(');
        match tag {
            Some(r) => {
                let src = r.source();
                self.out.push_str(WORD);
                if src.contains('|') {
                    self.out.push_str("(?:");
                    self.out.push_str(src);
                    self.out.push(')');
                } else {
                    self.out.push_str(src);
                }
                // groups inside the tag expression shift the numbering
                self.groups += Regex::new(src).map(|re| re.captures_len() - 1).unwrap_or(0);
            }
            None => self.out.push_str(WILDCARD),
        }
        self.out.push_str(r"\s+)");
        match element.quantifier {
            Quantifier::Exactly(1) => {}
            Quantifier::Exactly(n) => self.out.push_str(&format!("{{{n}}}")),
            Quantifier::Star => self.out.push('*'),
            Quantifier::Plus => self.out.push('+'),
        }
        Ok(())
    }

    /// Emits a context and returns its group number. A lone `{1}` element is
    /// its own group; anything else gets a wrapping group.
    fn context(&mut self, pattern: &SequencePattern) -> Result<Option<usize>> {
        match pattern.elements.as_slice() {
            [] => Ok(None),
            [single] if single.quantifier == Quantifier::Exactly(1) => {
                let group = self.groups + 1;
                self.element(single)?;
                Ok(Some(group))
            }
            elements => Ok(Some(self.wrapped(elements)?)),
        }
    }

    fn wrapped(&mut self, elements: &[PatternElement]) -> Result<usize> {
        self.groups += 1;
        let group = self.groups;
        self.out.push('(');
        for e in elements {
            self.element(e)?;
        }
        self.out.push(')');
        Ok(group)
    }
}

/// Compiles a before/target/after rule into a Perl-style global substitution
/// over the flat encoding. Word, chunk-state and sentence-edge atoms have no
/// flat-text equivalent and are rejected.
pub fn compile_flat(before: &SequencePattern, target: &SequencePattern, after: &SequencePattern) -> Result<String> {
    if target.min_len() == 0 {
        return Err(Error::EmptyTarget);
    }
    let mut em = Emitter {
        out: String::from("s{"),
        groups: 0,
    };
    let before_group = em.context(&before.without_leading_stars())?;
    let target_group = em.wrapped(&target.elements)?;
    let after_group = em.context(after)?;
    em.out.push_str("}{ ");
    if let Some(g) = before_group {
        em.out.push_str(&format!("${g} "));
    }
    em.out.push_str(&format!("( ${target_group} ) "));
    if let Some(g) = after_group {
        em.out.push_str(&format!("${g} "));
    }
    em.out.push_str("}g");
    Ok(em.out)
}
