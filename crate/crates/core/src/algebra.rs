//! Boolean relations, operations and polymorphism checks, and the
//! classification of finite constraint languages by their polymorphisms.
//!
//! Tuples are bit masks: position `i` of a tuple (0-based) is bit `i`.
//! Truth tables are indexed the same way, argument `x_i` at bit `i - 1`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest number of row combinations [`is_polymorphism`] will enumerate.
pub const MAX_MATRICES: u128 = 50_000_000;
const MAX_ARITY: usize = 63;
const MAX_FUNCTION_ARITY: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    arity: usize,
    tuples: BTreeSet<u64>,
}

impl Relation {
    pub fn new(arity: usize, tuples: impl IntoIterator<Item = u64>) -> Result<Relation> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::Param(format!("relation arity {arity} out of range")));
        }
        let tuples: BTreeSet<u64> = tuples.into_iter().collect();
        if let Some(t) = tuples.iter().find(|&&t| t >> arity != 0) {
            return Err(Error::Param(format!("tuple {t:#b} wider than arity {arity}")));
        }
        Ok(Relation { arity, tuples })
    }

    /// Tuples as bit strings, first position first: `"01"` sets position 1.
    pub fn from_strings<'a>(arity: usize, tuples: impl IntoIterator<Item = &'a str>) -> Result<Relation> {
        let parsed = tuples
            .into_iter()
            .map(|s| parse_bits(s, arity).ok_or_else(|| Error::Param(format!("bad tuple '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        Relation::new(arity, parsed)
    }

    /// Models of a clause over positions `0..arity`; `lits` holds
    /// `(position, positive)` pairs.
    pub fn clause(arity: usize, lits: &[(usize, bool)]) -> Result<Relation> {
        Relation::new(
            arity,
            (0..1u64 << arity).filter(|t| lits.iter().any(|&(i, pos)| (t >> i & 1 == 1) == pos)),
        )
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuples(&self) -> &BTreeSet<u64> {
        &self.tuples
    }

    pub fn contains(&self, t: u64) -> bool {
        self.tuples.contains(&t)
    }

    /// Every tuple complemented.
    pub fn dual(&self) -> Relation {
        let mask = full(self.arity);
        Relation {
            arity: self.arity,
            tuples: self.tuples.iter().map(|t| !t & mask).collect(),
        }
    }

    pub fn format_tuple(&self, t: u64) -> String {
        format_bits(t, self.arity)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, &t) in self.tuples.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            f.write_str(&format_bits(t, self.arity))?;
        }
        write!(f, "}}")
    }
}

fn full(arity: usize) -> u64 {
    if arity >= 64 {
        u64::MAX
    } else {
        (1u64 << arity) - 1
    }
}

pub(crate) fn parse_bits(s: &str, arity: usize) -> Option<u64> {
    if s.len() != arity {
        return None;
    }
    s.bytes().enumerate().try_fold(0u64, |acc, (i, b)| match b {
        b'0' => Some(acc),
        b'1' => Some(acc | 1 << i),
        _ => None,
    })
}

pub(crate) fn format_bits(t: u64, arity: usize) -> String {
    (0..arity).map(|i| if t >> i & 1 == 1 { '1' } else { '0' }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolFunction {
    arity: usize,
    table: Vec<bool>,
    name: Option<String>,
}

impl BoolFunction {
    pub fn new(arity: usize, table: Vec<bool>, name: Option<String>) -> Result<BoolFunction> {
        if arity == 0 || arity > MAX_FUNCTION_ARITY {
            return Err(Error::Param(format!("function arity {arity} out of range")));
        }
        if table.len() != 1 << arity {
            return Err(Error::Param(format!(
                "table of length {} for arity {arity}",
                table.len()
            )));
        }
        Ok(BoolFunction { arity, table, name })
    }

    pub fn from_fn(arity: usize, name: &str, f: impl Fn(&[bool]) -> bool) -> BoolFunction {
        let table = (0..1usize << arity)
            .map(|m| {
                let args: Vec<bool> = (0..arity).map(|i| m >> i & 1 == 1).collect();
                f(&args)
            })
            .collect();
        BoolFunction::new(arity, table, Some(name.to_string())).expect("arity in range")
    }

    /// The `d`-ary threshold that is 1 iff at least two arguments are 1.
    /// `t_3` is the majority function and `t_{d+1}` preserves positive
    /// clauses of up to `d` literals.
    pub fn threshold(d: usize) -> BoolFunction {
        BoolFunction::from_fn(d, &format!("t{d}"), |x| x.iter().filter(|&&b| b).count() >= 2)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or("f")
    }

    pub fn apply(&self, args: &[bool]) -> bool {
        assert_eq!(args.len(), self.arity, "argument count");
        let idx = args
            .iter()
            .enumerate()
            .fold(0usize, |m, (i, &b)| m | usize::from(b) << i);
        self.table[idx]
    }
}

/// Looks up a function by tag: `min`, `max`, `maj`, `mnrty`,
/// `and-or` (x∧(y∨z)), `or-and` (x∨(y∧z)), `and-or-not` (x∧(y∨¬z)),
/// `or-and-not` (x∨(y∧¬z)), or `t<d>` for the threshold of arity `d ≥ 3`.
pub fn named_function(tag: &str) -> Result<BoolFunction> {
    let unknown = || Error::UnknownTag(tag.to_string());
    Ok(match tag {
        "min" => BoolFunction::from_fn(2, tag, |x| x[0] && x[1]),
        "max" => BoolFunction::from_fn(2, tag, |x| x[0] || x[1]),
        "maj" => BoolFunction::from_fn(3, tag, |x| (x[0] && x[1]) || (x[1] && x[2]) || (x[2] && x[0])),
        "mnrty" => BoolFunction::from_fn(3, tag, |x| x[0] ^ x[1] ^ x[2]),
        "and-or" => BoolFunction::from_fn(3, tag, |x| x[0] && (x[1] || x[2])),
        "or-and" => BoolFunction::from_fn(3, tag, |x| x[0] || (x[1] && x[2])),
        "and-or-not" => BoolFunction::from_fn(3, tag, |x| x[0] && (x[1] || !x[2])),
        "or-and-not" => BoolFunction::from_fn(3, tag, |x| x[0] || (x[1] && !x[2])),
        _ => {
            let d: usize = tag.strip_prefix('t').and_then(|d| d.parse().ok()).ok_or_else(unknown)?;
            if !(3..=MAX_FUNCTION_ARITY).contains(&d) {
                return Err(unknown());
            }
            BoolFunction::threshold(d)
        }
    })
}

/// `f^dual(x) = ¬f(¬x)`.
pub fn dual_function(f: &BoolFunction) -> BoolFunction {
    let last = f.table.len() - 1;
    let table = (0..f.table.len()).map(|m| !f.table[!m & last]).collect();
    let name = match &f.name {
        Some(n) => n
            .strip_prefix("dual-")
            .map(str::to_string)
            .unwrap_or_else(|| format!("dual-{n}")),
        None => "dual-f".into(),
    };
    BoolFunction {
        arity: f.arity,
        table,
        name: Some(name),
    }
}

/// A `d × r` matrix of relation rows whose column-wise image escapes the
/// relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub rows: Vec<u64>,
    pub image: u64,
}

/// Column-wise application of `f` to `rows`.
pub fn apply_columns(f: &BoolFunction, rows: &[u64], arity: usize) -> u64 {
    assert_eq!(rows.len(), f.arity, "one row per argument");
    (0..arity).fold(0u64, |acc, j| {
        let idx = rows
            .iter()
            .enumerate()
            .fold(0usize, |m, (i, &r)| m | ((r >> j & 1) as usize) << i);
        acc | u64::from(f.table[idx]) << j
    })
}

/// `Ok(None)` if `f` preserves `r`, otherwise a counterexample.
///
/// Fails with [`Error::Cap`] when `|R|^d` exceeds [`MAX_MATRICES`].
pub fn is_polymorphism(f: &BoolFunction, r: &Relation) -> Result<Option<Counterexample>> {
    let rows: Vec<u64> = r.tuples.iter().copied().collect();
    if rows.is_empty() {
        return Ok(None);
    }
    let count = (rows.len() as u128).checked_pow(f.arity as u32).unwrap_or(u128::MAX);
    if count > MAX_MATRICES {
        return Err(Error::Cap {
            size: usize::try_from(count).unwrap_or(usize::MAX),
            cap: MAX_MATRICES as usize,
        });
    }
    let mut idx = vec![0usize; f.arity];
    let mut pick = vec![rows[0]; f.arity];
    loop {
        let image = apply_columns(f, &pick, r.arity);
        if !r.contains(image) {
            return Ok(Some(Counterexample { rows: pick, image }));
        }
        let mut i = 0;
        loop {
            if i == f.arity {
                return Ok(None);
            }
            idx[i] += 1;
            if idx[i] < rows.len() {
                pick[i] = rows[idx[i]];
                break;
            }
            idx[i] = 0;
            pick[i] = rows[0];
            i += 1;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Fpt,
    W1Hard,
    ParaPspaceHard,
    OpenDIhsbPlus(usize),
    OpenDIhsbMinus(usize),
}

impl Status {
    /// The status of the dual language.
    pub fn dual(self) -> Status {
        match self {
            Status::OpenDIhsbPlus(d) => Status::OpenDIhsbMinus(d),
            Status::OpenDIhsbMinus(d) => Status::OpenDIhsbPlus(d),
            s => s,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Fpt => f.write_str("FPT"),
            Status::W1Hard => f.write_str("W[1]-hard"),
            Status::ParaPspaceHard => f.write_str("paraPSPACE-hard"),
            Status::OpenDIhsbPlus(d) => write!(f, "open: FPT-equivalent to {d}-IHSB+"),
            Status::OpenDIhsbMinus(d) => write!(f, "open: FPT-equivalent to {d}-IHSB-"),
        }
    }
}

/// One polymorphism fact behind a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub function: BoolFunction,
    /// `None` when the function preserves every relation; otherwise the
    /// index of a relation it breaks and the matrix that shows it.
    pub broken: Option<(usize, Counterexample)>,
}

impl Witness {
    pub fn preserved(&self) -> bool {
        self.broken.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifierVerdict {
    pub status: Status,
    pub witnesses: Vec<Witness>,
}

/// Re-checks every witness of `verdict` against `gamma`.
pub fn verify_witnesses(gamma: &[Relation], verdict: &ClassifierVerdict) -> Result<bool> {
    for w in &verdict.witnesses {
        match &w.broken {
            None => {
                for r in gamma {
                    if is_polymorphism(&w.function, r)?.is_some() {
                        return Ok(false);
                    }
                }
            }
            Some((i, cx)) => {
                let Some(r) = gamma.get(*i) else { return Ok(false) };
                let rows_ok = cx.rows.len() == w.function.arity() && cx.rows.iter().all(|&t| r.contains(t));
                if !rows_ok || apply_columns(&w.function, &cx.rows, r.arity()) != cx.image || r.contains(cx.image) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

fn check(gamma: &[Relation], f: BoolFunction) -> Result<Witness> {
    for (i, r) in gamma.iter().enumerate() {
        if let Some(cx) = is_polymorphism(&f, r)? {
            return Ok(Witness {
                function: f,
                broken: Some((i, cx)),
            });
        }
    }
    Ok(Witness {
        function: f,
        broken: None,
    })
}

/// Classifies the parameterized complexity of evaluation over `gamma` with
/// a clause-covering backdoor.
///
/// `max_d` bounds the threshold search and must be at least the largest
/// arity in `gamma`.
pub fn classify(gamma: &[Relation], max_d: usize) -> Result<ClassifierVerdict> {
    if gamma.is_empty() {
        return Err(Error::Param("empty constraint language".into()));
    }
    let widest = gamma.iter().map(Relation::arity).max().expect("nonempty");
    if max_d < widest {
        return Err(Error::Param(format!(
            "max_d = {max_d} below the largest arity {widest}"
        )));
    }
    let mut witnesses = Vec::new();
    let done = |witnesses: Vec<Witness>, status| Ok(ClassifierVerdict { status, witnesses });

    for tag in ["maj", "mnrty"] {
        let w = check(gamma, named_function(tag)?)?;
        let hit = w.preserved();
        witnesses.push(w);
        if hit {
            return done(witnesses, Status::Fpt);
        }
    }

    for plus in [true, false] {
        let map = |f: BoolFunction| if plus { f } else { dual_function(&f) };
        let base = check(gamma, map(named_function("or-and")?))?;
        if !base.preserved() {
            witnesses.push(base);
            continue;
        }
        witnesses.push(base);
        for f in [map(named_function("or-and-not")?), map(BoolFunction::threshold(3))] {
            let w = check(gamma, f)?;
            let hit = w.preserved();
            witnesses.push(w);
            if hit {
                return done(witnesses, Status::Fpt);
            }
        }
        for d in 3..=max_d + 1 {
            if d + 1 > MAX_FUNCTION_ARITY {
                break;
            }
            let w = check(gamma, map(BoolFunction::threshold(d + 1)))?;
            if w.preserved() {
                witnesses.push(w);
                let status = if plus {
                    Status::OpenDIhsbPlus(d)
                } else {
                    Status::OpenDIhsbMinus(d)
                };
                return done(witnesses, status);
            }
        }
        return Err(Error::Internal(format!(
            "language closed under {} has no threshold polymorphism up to arity {}",
            if plus { "x∨(y∧z)" } else { "x∧(y∨z)" },
            max_d + 2
        )));
    }

    for tag in ["min", "max"] {
        let w = check(gamma, named_function(tag)?)?;
        let hit = w.preserved();
        witnesses.push(w);
        if hit {
            return done(witnesses, Status::W1Hard);
        }
    }
    done(witnesses, Status::ParaPspaceHard)
}
