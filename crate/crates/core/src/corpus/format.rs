//! Corpus file formats.
//!
//! - slash: one sentence per line, atoms `word/TAG` split on the last slash,
//!   base NPs delimited by standalone `(` and `)` atoms.
//! - flat: same layout with atoms `word__TAG`; this is the string the flat
//!   substitution expressions of [`crate::pattern::compile_flat`] run over.
//! - column: `word<TAB>pos<TAB>iob` per line, a blank line ends a sentence.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::{AnnotatedSentence, ChunkSpan, ChunkTag, Corpus, Token};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    #[default]
    Slash,
    Flat,
    Column,
}

impl CorpusFormat {
    /// Guesses the format from a file extension (`.flat`, `.col`/`.iob`/`.tsv`),
    /// defaulting to slash.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("flat") => CorpusFormat::Flat,
            Some("col" | "iob" | "tsv" | "column") => CorpusFormat::Column,
            _ => CorpusFormat::Slash,
        }
    }

    pub fn parse(self, text: &str, label: &str) -> Result<Corpus> {
        match self {
            CorpusFormat::Slash => parse_slash(text, label),
            CorpusFormat::Flat => parse_flat(text, label),
            CorpusFormat::Column => parse_column(text, label),
        }
    }

    pub fn write(self, corpus: &Corpus) -> Result<String> {
        match self {
            CorpusFormat::Slash => Ok(write_slash(corpus)),
            CorpusFormat::Flat => write_flat(corpus),
            CorpusFormat::Column => Ok(write_column(corpus)),
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "slash" => Ok(CorpusFormat::Slash),
            "flat" => Ok(CorpusFormat::Flat),
            "column" | "col" => Ok(CorpusFormat::Column),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Slash => "slash",
            CorpusFormat::Flat => "flat",
            CorpusFormat::Column => "column",
        })
    }
}

/// Reads one line of whitespace-separated atoms with bracket atoms marking spans.
fn parse_bracketed_line(
    line: &str,
    line_no: usize,
    split_atom: impl Fn(&str) -> std::result::Result<(String, String), String>,
) -> Result<AnnotatedSentence> {
    let mut tokens = Vec::new();
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for atom in line.split_whitespace() {
        match atom {
            "(" => {
                if open.is_some() {
                    return Err(Error::parse(line_no, "nested '(' inside a base NP"));
                }
                open = Some(tokens.len());
            }
            ")" => match open.take() {
                Some(start) if start == tokens.len() => {
                    return Err(Error::parse(line_no, "empty '( )' bracket"));
                }
                Some(start) => spans.push(ChunkSpan::new(start, tokens.len())),
                None => return Err(Error::parse(line_no, "unbalanced ')'")),
            },
            _ => {
                let (word, pos) = split_atom(atom).map_err(|m| Error::parse(line_no, m))?;
                let token = Token::new(word, pos).map_err(|e| Error::parse(line_no, e.to_string()))?;
                tokens.push(token);
            }
        }
    }
    if open.is_some() {
        return Err(Error::parse(line_no, "unbalanced '('"));
    }
    AnnotatedSentence::new(tokens, spans).map_err(|e| Error::parse(line_no, e.to_string()))
}

fn write_bracketed(sentence: &AnnotatedSentence, mut atom: impl FnMut(&Token, &mut String)) -> String {
    let mut out = String::new();
    let mut spans = sentence.spans().iter().peekable();
    let mut close_at = None;
    for (i, token) in sentence.tokens().iter().enumerate() {
        if close_at == Some(i) {
            out.push_str(" )");
            close_at = None;
        }
        if let Some(span) = spans.next_if(|s| s.start == i) {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push('(');
            close_at = Some(span.end);
        }
        if !out.is_empty() {
            out.push(' ');
        }
        atom(token, &mut out);
    }
    if close_at.is_some() {
        out.push_str(" )");
    }
    out
}

fn split_slash(atom: &str) -> std::result::Result<(String, String), String> {
    match atom.rsplit_once('/') {
        Some((word, pos)) if !word.is_empty() && !pos.is_empty() => Ok((word.to_string(), pos.to_string())),
        _ => Err(format!("atom {atom:?} is not word/TAG")),
    }
}

fn split_flat(atom: &str) -> std::result::Result<(String, String), String> {
    match atom.split_once("__") {
        Some((word, pos)) if !word.contains('_') && !pos.contains('_') => Ok((word.to_string(), pos.to_string())),
        _ => Err(format!("atom {atom:?} is not word__TAG")),
    }
}

pub fn parse_slash(text: &str, label: &str) -> Result<Corpus> {
    let sentences = text
        .lines()
        .enumerate()
        .map(|(i, line)| parse_bracketed_line(line, i + 1, split_slash))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus::new(label, sentences))
}

pub fn serialize_slash(sentence: &AnnotatedSentence) -> String {
    write_bracketed(sentence, |t, out| {
        out.push_str(t.word());
        out.push('/');
        out.push_str(t.pos());
    })
}

pub fn write_slash(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        out.push_str(&serialize_slash(s));
        out.push('\n');
    }
    out
}

pub fn parse_flat_sentence(line: &str) -> Result<AnnotatedSentence> {
    parse_bracketed_line(line, 1, split_flat)
}

pub fn parse_flat(text: &str, label: &str) -> Result<Corpus> {
    let sentences = text
        .lines()
        .enumerate()
        .map(|(i, line)| parse_bracketed_line(line, i + 1, split_flat))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus::new(label, sentences))
}

/// Encodes a sentence as space-separated `word__TAG` atoms with `(` / `)`
/// around spans.
pub fn serialize_flat(sentence: &AnnotatedSentence) -> Result<String> {
    if let Some(t) = sentence
        .tokens()
        .iter()
        .find(|t| t.word().contains('_') || t.pos().contains('_'))
    {
        return Err(Error::UnderscoreInToken(t.to_string()));
    }
    Ok(write_bracketed(sentence, |t, out| {
        out.push_str(t.word());
        out.push_str("__");
        out.push_str(t.pos());
    }))
}

pub fn write_flat(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for s in &corpus.sentences {
        out.push_str(&serialize_flat(s)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_column(text: &str, label: &str) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut tags = Vec::new();
    let mut first_line = 1;
    let finish = |tokens: &mut Vec<Token>, tags: &mut Vec<ChunkTag>, first_line: usize| {
        AnnotatedSentence::from_iob(std::mem::take(tokens), &std::mem::take(tags)).map_err(|e| match e {
            Error::InvalidIob { index } => Error::parse(first_line + index, "B does not follow a chunk"),
            other => other,
        })
    };
    let mut pending = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            sentences.push(finish(&mut tokens, &mut tags, first_line)?);
            first_line = line_no + 1;
            pending = false;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [word, pos, tag] = fields[..] else {
            return Err(Error::parse(line_no, "expected word<TAB>pos<TAB>tag"));
        };
        let tag: ChunkTag = tag.parse().map_err(|m: String| Error::parse(line_no, m))?;
        tokens.push(Token::new(word, pos).map_err(|e| Error::parse(line_no, e.to_string()))?);
        tags.push(tag);
        pending = true;
    }
    if pending {
        sentences.push(finish(&mut tokens, &mut tags, first_line)?);
    }
    Ok(Corpus::new(label, sentences))
}

pub fn write_column(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sentences {
        for (t, tag) in s.tokens().iter().zip(s.iob_tags()) {
            out.push_str(t.word());
            out.push('\t');
            out.push_str(t.pos());
            out.push('\t');
            out.push_str(tag.as_str());
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
