//! Text format for constraint languages.
//!
//! One relation per line, `<name> <arity> : <tuple>,<tuple>,...`, each tuple
//! a bit string with the first position first. `#` starts a comment.

use std::collections::BTreeSet;

use crate::algebra::{format_bits, parse_bits, Relation};
use crate::error::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedRelation {
    pub name: String,
    pub relation: Relation,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationFile {
    pub entries: Vec<NamedRelation>,
}

impl RelationFile {
    pub fn relations(&self) -> Vec<Relation> {
        self.entries.iter().map(|e| e.relation.clone()).collect()
    }
}

pub fn parse_relations(text: &str) -> Result<RelationFile, ParseError> {
    let mut entries = Vec::new();
    let mut names = BTreeSet::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let col_of = |s: &str| s.as_ptr() as usize - raw.as_ptr() as usize + 1;
        let Some((head, body)) = line.split_once(':') else {
            return Err(ParseError::new(ln, 1, "expected '<name> <arity> : <tuples>'"));
        };
        let mut words = head.split_whitespace();
        let (Some(name), Some(arity_s), None) = (words.next(), words.next(), words.next()) else {
            return Err(ParseError::new(ln, 1, "expected '<name> <arity>' before ':'"));
        };
        let arity: usize = arity_s
            .parse()
            .ok()
            .filter(|&a| (1..=63).contains(&a))
            .ok_or_else(|| ParseError::new(ln, col_of(arity_s), format!("bad arity '{arity_s}'")))?;
        if !names.insert(name.to_string()) {
            return Err(ParseError::new(
                ln,
                col_of(name),
                format!("relation '{name}' defined twice"),
            ));
        }
        let mut tuples = BTreeSet::new();
        if !body.trim().is_empty() {
            for piece in body.split(',') {
                let t = piece.trim();
                let at = if t.is_empty() { col_of(piece) } else { col_of(t) };
                if t.len() != arity {
                    return Err(ParseError::new(
                        ln,
                        at,
                        format!("tuple '{t}' does not have arity {arity}"),
                    ));
                }
                let bits = parse_bits(t, arity)
                    .ok_or_else(|| ParseError::new(ln, at, format!("tuple '{t}' is not a bit string")))?;
                if !tuples.insert(bits) {
                    return Err(ParseError::new(ln, at, format!("tuple '{t}' listed twice")));
                }
            }
        }
        let relation = Relation::new(arity, tuples).map_err(|e| ParseError::new(ln, 1, e.to_string()))?;
        entries.push(NamedRelation {
            name: name.to_string(),
            relation,
        });
    }
    Ok(RelationFile { entries })
}

pub fn write_relations(file: &RelationFile) -> String {
    let mut out = String::new();
    for e in &file.entries {
        let r = &e.relation;
        let tuples: Vec<String> = r.tuples().iter().map(|&t| format_bits(t, r.arity())).collect();
        out.push_str(&format!("{} {} : {}\n", e.name, r.arity(), tuples.join(",")));
    }
    out
}
