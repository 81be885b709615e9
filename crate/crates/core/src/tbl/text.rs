//! Text forms of learned models.
//!
//! Rules, one per line, optionally followed by a tab and the gain logged at
//! learning time:
//!
//! ```text
//! from=I to=B IF pos[0]=DT pos[1]=NN chunk[-1]=I chunk[-2]=I<TAB>gain=7
//! ```
//!
//! Baseline map: `POS<TAB>TAG` per line. Templates: one per line as
//! space-separated slots, e.g. `pos[0] pos[1] chunk[-1]`. Lines starting
//! with `#` are comments in all three.

use super::{BaselineMap, Condition, Feature, FeatureValue, LearnedRule, TblRule, Template};
use crate::corpus::ChunkTag;
use crate::error::{Error, Result};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn model_err(line: usize, message: impl Into<String>) -> Error {
    Error::Model {
        line,
        message: message.into(),
    }
}

pub fn write_tbl_rules(rules: &[LearnedRule]) -> String {
    rules.iter().map(|r| format!("{}\tgain={}\n", r.rule, r.gain)).collect()
}

fn parse_slot(line: usize, text: &str) -> Result<(i8, Feature, &str)> {
    let (name, rest) = text
        .split_once('[')
        .ok_or_else(|| model_err(line, format!("malformed slot {text:?}")))?;
    let (offset, value) = rest
        .split_once(']')
        .ok_or_else(|| model_err(line, format!("malformed slot {text:?}")))?;
    let feature = match name {
        "word" => Feature::Word,
        "pos" => Feature::Pos,
        "chunk" => Feature::Chunk,
        other => return Err(model_err(line, format!("unknown feature {other:?}"))),
    };
    let offset: i8 = offset
        .parse()
        .map_err(|_| model_err(line, format!("bad offset {offset:?}")))?;
    Ok((offset, feature, value))
}

fn parse_tag(line: usize, s: &str) -> Result<ChunkTag> {
    s.parse().map_err(|m: String| model_err(line, m))
}

pub fn parse_tbl_rules(text: &str) -> Result<Vec<TblRule>> {
    content_lines(text)
        .map(|(line, l)| {
            let rule_text = l.split('\t').next().unwrap_or_default();
            let mut parts = rule_text.split_whitespace();
            let from = parts
                .next()
                .and_then(|p| p.strip_prefix("from="))
                .ok_or_else(|| model_err(line, "expected from=TAG"))?;
            let to = parts
                .next()
                .and_then(|p| p.strip_prefix("to="))
                .ok_or_else(|| model_err(line, "expected to=TAG"))?;
            if parts.next() != Some("IF") {
                return Err(model_err(line, "expected IF"));
            }
            let conditions = parts
                .map(|c| {
                    let (offset, feature, value) = parse_slot(line, c)?;
                    let value = value
                        .strip_prefix('=')
                        .filter(|v| !v.is_empty())
                        .ok_or_else(|| model_err(line, format!("condition {c:?} has no value")))?;
                    let value = match feature {
                        Feature::Word => FeatureValue::Word(value.to_string()),
                        Feature::Pos => FeatureValue::Pos(value.to_string()),
                        Feature::Chunk => FeatureValue::Chunk(parse_tag(line, value)?),
                    };
                    Ok(Condition::new(offset, value))
                })
                .collect::<Result<Vec<_>>>()?;
            TblRule::new(parse_tag(line, from)?, parse_tag(line, to)?, conditions)
                .map_err(|e| model_err(line, e.to_string()))
        })
        .collect()
}

impl BaselineMap {
    pub fn to_text(&self) -> String {
        self.map.iter().map(|(pos, tag)| format!("{pos}\t{tag}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for (line, l) in content_lines(text) {
            let (pos, tag) = l
                .split_once('\t')
                .ok_or_else(|| model_err(line, "expected POS<TAB>TAG"))?;
            map.insert(pos.to_string(), parse_tag(line, tag.trim())?);
        }
        Ok(BaselineMap { map })
    }
}

pub fn parse_templates(text: &str) -> Result<Vec<Template>> {
    content_lines(text)
        .map(|(line, l)| {
            let slots = l
                .split_whitespace()
                .map(|s| match parse_slot(line, s)? {
                    (offset, feature, "") => Ok((offset, feature)),
                    _ => Err(model_err(line, format!("template slot {s:?} carries a value"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Template::new(slots).map_err(|e| model_err(line, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_text_round_trip() {
        let line = "from=I to=B IF pos[0]=DT pos[1]=NN chunk[-1]=I chunk[-2]=I";
        let rules = parse_tbl_rules(&format!("# model\n{line}\tgain=7\n")).unwrap();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].to_string(), line);
        let learned = LearnedRule {
            rule: rules[0].clone(),
            gain: 7,
            errors_before: 9,
            errors_after: 2,
        };
        assert_eq!(write_tbl_rules(&[learned]), format!("{line}\tgain=7\n"));
        assert_eq!(
            parse_tbl_rules("from=O to=I IF word[1]=a=b").unwrap()[0].conditions[0].value,
            FeatureValue::Word("a=b".into())
        );
    }

    #[test]
    fn rule_text_errors() {
        for bad in [
            "to=B IF pos[0]=DT",
            "from=I to=B pos[0]=DT",
            "from=I to=B IF",
            "from=I to=I IF pos[0]=DT",
            "from=I to=B IF pos[9]=DT",
            "from=I to=B IF tag[0]=DT",
            "from=I to=B IF chunk[1]=X",
        ] {
            assert!(
                matches!(parse_tbl_rules(bad), Err(Error::Model { line: 1, .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn baseline_round_trip() {
        let text = "DT\tI\nNN\tI\nVBD\tO\n";
        assert_eq!(BaselineMap::from_text(text).unwrap().to_text(), text);
        assert!(BaselineMap::from_text("DT I\n").is_err());
    }

    #[test]
    fn template_file() {
        let t = parse_templates("# ours\npos[0] pos[1] chunk[-1]\nword[-3]\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].to_string(), "pos[0] pos[1] chunk[-1]");
        assert!(parse_templates("pos[0]=DT\n").is_err());
        assert!(parse_templates("pos[5]\n").is_err());
    }
}
