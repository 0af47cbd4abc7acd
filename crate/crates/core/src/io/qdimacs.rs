//! QDIMACS reader and writer.
//!
//! Besides the standard lines, `x <lits> 0` declares a parity constraint
//! whose literals XOR to true: each negative literal flips the parity, so
//! `x 1 -2 0` reads `x1 ⊕ x2 = 0`. The comment `c backdoor-begin` separates
//! tractable atoms from backdoor clauses, and `c class <tag>` records the
//! base class.

use std::fmt::Write as _;

use crate::backdoor::{partition, BaseClass};
use crate::error::{Error, ParseError, Result};
use crate::formula::{Atom, Clause, Equation, Lit, Matrix, Prefix, QbfFormula, Quantifier, Var};

/// Comment line separating tractable atoms from the backdoor part.
pub const BACKDOOR_MARKER: &str = "c backdoor-begin";
const CLASS_COMMENT: &str = "c class ";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Split the matrix against this class, overriding any partition or
    /// class recorded in the file.
    pub class: Option<BaseClass>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parsed {
    pub formula: QbfFormula,
    /// Recoverable oddities, e.g. a header count that does not match.
    pub warnings: Vec<String>,
}

/// Parses with the partition recorded in the file, if any.
pub fn parse_qdimacs(text: &str) -> std::result::Result<Parsed, ParseError> {
    let raw = read(text)?;
    let formula = match raw.class {
        Some(c) if !raw.marked => partition(&raw.formula, c).map_err(|e| ParseError::new(1, 1, e.to_string()))?,
        _ => raw.formula,
    };
    Ok(Parsed {
        formula,
        warnings: raw.warnings,
    })
}

/// Parses, then re-splits the matrix if `opts.class` is set.
pub fn parse_qdimacs_with(text: &str, opts: &ParseOptions) -> Result<Parsed> {
    let Some(class) = opts.class else {
        return Ok(parse_qdimacs(text)?);
    };
    let raw = read(text)?;
    Ok(Parsed {
        formula: partition(&raw.formula, class)?,
        warnings: raw.warnings,
    })
}

struct Raw {
    formula: QbfFormula,
    warnings: Vec<String>,
    marked: bool,
    class: Option<BaseClass>,
}

fn read(text: &str) -> std::result::Result<Raw, ParseError> {
    if let Some((i, _)) = text.char_indices().find(|(_, c)| !c.is_ascii()) {
        let line = text[..i].matches('\n').count() + 1;
        let column = i - text[..i].rfind('\n').map_or(0, |p| p + 1) + 1;
        return Err(ParseError::new(line, column, "non-ASCII input"));
    }
    let mut warnings = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    let mut prefix = Prefix::default();
    let mut tractable: Vec<Atom> = Vec::new();
    let mut backdoor: Vec<Clause> = Vec::new();
    let mut in_backdoor = false;
    let mut marked = false;
    let mut class = None;
    let mut seen_atom = false;

    for (ln, raw) in text.split('\n').enumerate() {
        let ln = ln + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let tokens = tokenize(line);
        let Some(&(col, first)) = tokens.first() else { continue };
        let err = |col: usize, msg: String| ParseError::new(ln, col, msg);
        match first {
            "c" => {
                let trimmed = line.trim();
                if trimmed == BACKDOOR_MARKER {
                    if in_backdoor {
                        return Err(err(col, "second backdoor marker".into()));
                    }
                    in_backdoor = true;
                    marked = true;
                } else if let Some(tag) = trimmed.strip_prefix(CLASS_COMMENT) {
                    match tag.trim().parse::<BaseClass>() {
                        Ok(c) => class = Some(c),
                        Err(_) => warnings.push(format!("line {ln}: ignoring unknown class '{}'", tag.trim())),
                    }
                }
            }
            "p" => {
                if header.is_some() {
                    return Err(err(col, "second header line".into()));
                }
                if tokens.len() != 4 || tokens[1].1 != "cnf" {
                    return Err(err(col, "expected 'p cnf <vars> <clauses>'".into()));
                }
                let count = |(c, t): (usize, &str)| t.parse::<usize>().map_err(|_| err(c, format!("bad count '{t}'")));
                header = Some((count(tokens[2])?, count(tokens[3])?));
            }
            "a" | "e" => {
                if header.is_none() {
                    return Err(err(col, "quantifier line before the header".into()));
                }
                if seen_atom {
                    return Err(err(col, "quantifier line after the first clause".into()));
                }
                let q = if first == "a" {
                    Quantifier::Forall
                } else {
                    Quantifier::Exists
                };
                for lit in terminated(&tokens[1..], ln)? {
                    if lit.1 < 0 {
                        return Err(err(lit.0, "negative variable in a quantifier line".into()));
                    }
                    let v = Var::new(lit.1 as u32);
                    prefix
                        .push(v, q)
                        .map_err(|_| err(lit.0, format!("{v} quantified twice")))?;
                }
            }
            "x" => {
                if header.is_none() {
                    return Err(err(col, "parity line before the header".into()));
                }
                if in_backdoor {
                    return Err(err(col, "parity line inside the backdoor section".into()));
                }
                seen_atom = true;
                let lits = terminated(&tokens[1..], ln)?;
                tractable.push(Atom::Equation(Equation::from_lits(lits.iter().map(|l| to_lit(l.1)))));
            }
            _ => {
                if header.is_none() {
                    return Err(err(col, "clause before the header".into()));
                }
                seen_atom = true;
                let lits = terminated(&tokens, ln)?;
                let c = Clause::new(lits.iter().map(|l| to_lit(l.1))).map_err(|e| match e {
                    Error::Tautology(v) => {
                        let at = lits
                            .iter()
                            .find(|l| l.1.unsigned_abs() == u64::from(v.id()))
                            .map_or(col, |l| l.0);
                        err(at, format!("tautological clause on {v}"))
                    }
                    other => err(col, other.to_string()),
                })?;
                if in_backdoor {
                    backdoor.push(c);
                } else {
                    tractable.push(Atom::Clause(c));
                }
            }
        }
    }

    let Some((nvars, nclauses)) = header else {
        return Err(ParseError::new(1, 1, "missing 'p cnf' header"));
    };
    let atoms = tractable.len() + backdoor.len();
    if atoms != nclauses {
        warnings.push(format!("header announces {nclauses} clauses, found {atoms}"));
    }
    let mut matrix = Matrix::new(tractable, backdoor);
    let free: Vec<Var> = matrix.vars().into_iter().filter(|&v| !prefix.contains(v)).collect();
    if !free.is_empty() {
        let names: Vec<String> = free.iter().map(Var::to_string).collect();
        warnings.push(format!("unquantified {} made innermost existential", names.join(" ")));
        for v in free {
            prefix.push(v, Quantifier::Exists).expect("not yet quantified");
        }
    }
    let max_id = prefix.vars().map(Var::id).max().unwrap_or(0) as usize;
    if max_id > nvars {
        warnings.push(format!("header announces {nvars} variables, found index {max_id}"));
    }
    if !marked {
        let clauses = std::mem::take(&mut matrix.backdoor);
        matrix.tractable.extend(clauses.into_iter().map(Atom::Clause));
    }
    Ok(Raw {
        formula: QbfFormula::new(prefix, matrix, if marked { class } else { None }),
        warnings,
        marked,
        class,
    })
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_ascii_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

/// Nonzero integers up to a closing `0`, which must be the last token.
fn terminated(tokens: &[(usize, &str)], ln: usize) -> std::result::Result<Vec<(usize, i64)>, ParseError> {
    let mut out = Vec::with_capacity(tokens.len());
    for (i, &(col, t)) in tokens.iter().enumerate() {
        let x: i64 = t
            .parse()
            .ok()
            .filter(|x: &i64| x.unsigned_abs() <= u64::from(u32::MAX))
            .ok_or_else(|| ParseError::new(ln, col, format!("bad literal '{t}'")))?;
        if x == 0 {
            if i + 1 != tokens.len() {
                return Err(ParseError::new(ln, tokens[i + 1].0, "tokens after the terminating 0"));
            }
            return Ok(out);
        }
        out.push((col, x));
    }
    let col = tokens.last().map_or(1, |(c, t)| c + t.len());
    Err(ParseError::new(ln, col, "missing terminating 0"))
}

fn to_lit(x: i64) -> Lit {
    Lit::from_dimacs(x).expect("nonzero and in range")
}

/// Serializes `formula`. The partition and base class are recorded in
/// comments so that parsing the output gives the formula back.
pub fn write_qdimacs(formula: &QbfFormula) -> String {
    let mut out = String::new();
    let atoms = formula
        .matrix
        .tractable
        .iter()
        .filter(|a| !matches!(a, Atom::Equation(e) if e.is_trivial()))
        .count()
        + formula.matrix.backdoor.len();
    writeln!(out, "p cnf {} {}", formula.max_var_id(), atoms).expect("string write");
    if let Some(c) = formula.base_class {
        writeln!(out, "{CLASS_COMMENT}{c}").expect("string write");
    }
    let entries = formula.prefix.entries();
    let mut i = 0;
    while i < entries.len() {
        let q = entries[i].1;
        out.push(if q == Quantifier::Forall { 'a' } else { 'e' });
        while i < entries.len() && entries[i].1 == q {
            write!(out, " {}", entries[i].0.id()).expect("string write");
            i += 1;
        }
        out.push_str(" 0\n");
    }
    for a in &formula.matrix.tractable {
        match a {
            Atom::Clause(c) => write_clause(&mut out, c),
            Atom::Equation(e) if e.is_trivial() => {}
            Atom::Equation(e) => {
                out.push('x');
                for (j, v) in e.vars().iter().enumerate() {
                    let negate = j == 0 && !e.rhs();
                    write!(out, " {}{}", if negate { "-" } else { "" }, v.id()).expect("string write");
                }
                out.push_str(" 0\n");
            }
        }
    }
    if !formula.matrix.backdoor.is_empty() || formula.base_class.is_some() {
        out.push_str(BACKDOOR_MARKER);
        out.push('\n');
        for c in &formula.matrix.backdoor {
            write_clause(&mut out, c);
        }
    }
    out
}

fn write_clause(out: &mut String, c: &Clause) {
    for l in c.lits() {
        write!(out, "{} ", l.to_dimacs()).expect("string write");
    }
    out.push_str("0\n");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{backdoor_example, BACKDOOR_EXAMPLE_QDIMACS};

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    #[test]
    fn minimal_file() {
        let p = parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 2 0\n").unwrap();
        assert!(p.warnings.is_empty());
        let f = p.formula;
        assert_eq!(
            f.prefix,
            Prefix::new([(v(1), Quantifier::Exists), (v(2), Quantifier::Exists)]).unwrap()
        );
        assert_eq!(
            f.matrix.tractable,
            vec![Atom::Clause(Clause::from_dimacs(&[1, 2]).unwrap())]
        );
    }

    #[test]
    fn example_file_matches_fixture() {
        let opts = ParseOptions {
            class: Some(BaseClass::TwoCnf),
        };
        let f = parse_qdimacs_with(BACKDOOR_EXAMPLE_QDIMACS, &opts).unwrap().formula;
        assert_eq!(f.canonical(), backdoor_example().canonical());
        let g = parse_qdimacs(&write_qdimacs(&f)).unwrap().formula;
        assert_eq!(g.canonical(), f.canonical());
    }

    #[test]
    fn parity_line() {
        let f = parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\nx 1 2 0\n").unwrap().formula;
        assert_eq!(f.prefix.quantifier(v(1)), Some(Quantifier::Forall));
        assert_eq!(
            f.matrix.tractable,
            vec![Atom::Equation(Equation::new([v(1), v(2)], true))]
        );
        let f = parse_qdimacs("p cnf 2 1\ne 1 2 0\nx 1 -2 0\n").unwrap().formula;
        assert_eq!(
            f.matrix.tractable,
            vec![Atom::Equation(Equation::new([v(1), v(2)], false))]
        );
    }

    #[test]
    fn even_parity_negates_smallest() {
        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists), (v(2), Quantifier::Exists)]).unwrap(),
            Matrix::new(vec![Equation::new([v(1), v(2)], false).into()], vec![]),
            None,
        );
        assert_eq!(write_qdimacs(&f), "p cnf 2 1\ne 1 2 0\nx -1 2 0\n");
    }

    #[test]
    fn empty_matrix() {
        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Forall)]).unwrap(),
            Matrix::default(),
            None,
        );
        assert_eq!(write_qdimacs(&f), "p cnf 1 0\na 1 0\n");
    }

    #[test]
    fn crlf_and_free_variables() {
        let p = parse_qdimacs("c hi\r\np cnf 3 2\r\na 1 0\r\n1 2 0\r\n-3 0\r\n").unwrap();
        assert_eq!(p.formula.prefix.len(), 3);
        assert_eq!(p.formula.prefix.entries()[2], (v(3), Quantifier::Exists));
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn count_mismatch_is_a_warning() {
        let p = parse_qdimacs("p cnf 1 3\ne 1 0\n1 0\n").unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 z 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 3));
        let e = parse_qdimacs("1 2 0\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = parse_qdimacs("p cnf 2 2\ne 1 0\n1 0\ne 2 0\n").unwrap_err();
        assert_eq!(e.line, 4);
        let e = parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 -2 2 0\n").unwrap_err();
        assert!(e.message.contains("tautological"));
        assert_eq!(e.column, 3);
        let e = parse_qdimacs("p cnf 2 1\ne 1 2 0\n1 2\n").unwrap_err();
        assert!(e.message.contains("terminating"));
        assert!(parse_qdimacs("p cnf 2 1\ne 1 1 0\n").is_err());
        assert!(parse_qdimacs("p dnf 2 1\n").is_err());
        assert!(parse_qdimacs("p cnf 1 1\ne 1 0\n1 0 ä\n").is_err());
    }

    #[test]
    fn duplicate_literals_collapse() {
        let f = parse_qdimacs("p cnf 1 1\ne 1 0\n1 1 0\nx 1 1 0\n").unwrap().formula;
        assert_eq!(f.matrix.tractable[0], Atom::Clause(Clause::from_dimacs(&[1]).unwrap()));
        assert_eq!(f.matrix.tractable[1], Atom::Equation(Equation::new([], true)));
    }

    #[test]
    fn marker_and_class_round_trip() {
        let text = write_qdimacs(&backdoor_example());
        assert!(text.contains("c class 2cnf\n"));
        assert!(text.contains("c backdoor-begin\n-3 -4 -5 0\n"));
        let f = parse_qdimacs(&text).unwrap().formula;
        assert_eq!(f, backdoor_example());
        assert_eq!(write_qdimacs(&f), text);
    }

    #[test]
    fn empty_clause_and_contradiction_round_trip() {
        let f = QbfFormula::new(
            Prefix::default(),
            Matrix::new(vec![Clause::empty().into(), Equation::new([], true).into()], vec![]),
            None,
        );
        let text = write_qdimacs(&f);
        assert_eq!(text, "p cnf 0 2\n0\nx 0\n");
        assert_eq!(parse_qdimacs(&text).unwrap().formula, f);
    }
}
