//! Data model for prenex quantified formulas whose matrix mixes clauses and
//! parity equations, split into a tractable part and a backdoor part.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Not;

use crate::backdoor::{atom_in_class, BaseClass};
use crate::error::{Error, Result};

/// A propositional variable, identified by its 1-based QDIMACS index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    /// # Panics
    ///
    /// If `id` is zero.
    pub fn new(id: u32) -> Var {
        assert!(id > 0, "variable ids are 1-based");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn lit(self, positive: bool) -> Lit {
        Lit { var: self, positive }
    }

    pub fn pos(self) -> Lit {
        self.lit(true)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        self.lit(false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable with a polarity. Orders by variable first, negative before
/// positive.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }

    /// The value its variable needs for the literal to hold.
    pub fn satisfying_value(self) -> bool {
        self.positive
    }

    pub fn from_dimacs(x: i64) -> Option<Lit> {
        if x == 0 || x.unsigned_abs() > u64::from(u32::MAX) {
            return None;
        }
        Some(Var::new(x.unsigned_abs() as u32).lit(x > 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.0);
        if self.positive {
            id
        } else {
            -id
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "¬{}", self.var)
        }
    }
}

/// A disjunction of literals, stored sorted and duplicate-free.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a canonical clause. Duplicate literals collapse; a clause with
    /// both polarities of a variable is rejected.
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Result<Clause> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if let Some(w) = lits.windows(2).find(|w| w[0].var == w[1].var) {
            return Err(Error::Tautology(w[0].var));
        }
        Ok(Clause { lits })
    }

    /// Wraps `lits` as-is, without sorting or tautology checks. Intended for
    /// callers that want [`validate`] to report malformed input instead of
    /// failing at construction.
    pub fn new_unchecked(lits: Vec<Lit>) -> Clause {
        Clause { lits }
    }

    /// The empty clause, which is unsatisfiable.
    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn from_dimacs(lits: &[i64]) -> Result<Clause> {
        Clause::new(
            lits.iter()
                .map(|&x| Lit::from_dimacs(x).expect("nonzero literal in from_dimacs")),
        )
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.lits.iter().map(|l| l.var)
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn positive_count(&self) -> usize {
        self.lits.iter().filter(|l| l.positive).count()
    }

    pub fn negative_count(&self) -> usize {
        self.lits.len() - self.positive_count()
    }

    pub fn is_canonical(&self) -> bool {
        self.lits.windows(2).all(|w| w[0] < w[1])
    }

    /// First variable that occurs in both polarities, if any.
    pub fn tautology_witness(&self) -> Option<Var> {
        let mut seen: HashMap<Var, bool> = HashMap::new();
        for l in &self.lits {
            match seen.insert(l.var, l.positive) {
                Some(p) if p != l.positive => return Some(l.var),
                _ => {}
            }
        }
        None
    }

    /// Returns `None` if `value` satisfies the clause, otherwise the clause
    /// with the literals of assigned variables removed.
    fn restrict(&self, value: impl Fn(Var) -> Option<bool>) -> Option<Clause> {
        let mut kept = Vec::with_capacity(self.lits.len());
        for &l in &self.lits {
            match value(l.var) {
                Some(v) if l.eval(v) => return None,
                Some(_) => {}
                None => kept.push(l),
            }
        }
        Some(Clause { lits: kept })
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A parity constraint `⊕ vars = rhs` over GF(2).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Equation {
    vars: Vec<Var>,
    rhs: bool,
}

impl Equation {
    /// Repeated variables cancel in pairs.
    pub fn new<I: IntoIterator<Item = Var>>(vars: I, rhs: bool) -> Equation {
        let mut vars: Vec<Var> = vars.into_iter().collect();
        vars.sort_unstable();
        let mut out: Vec<Var> = Vec::with_capacity(vars.len());
        for v in vars {
            if out.last() == Some(&v) {
                out.pop();
            } else {
                out.push(v);
            }
        }
        Equation { vars: out, rhs }
    }

    /// The XOR of `lits` is true. Each negative literal flips the parity.
    pub fn from_lits<I: IntoIterator<Item = Lit>>(lits: I) -> Equation {
        let mut rhs = true;
        let vars: Vec<Var> = lits
            .into_iter()
            .map(|l| {
                if !l.positive {
                    rhs = !rhs;
                }
                l.var
            })
            .collect();
        Equation::new(vars, rhs)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn rhs(&self) -> bool {
        self.rhs
    }

    pub fn contains(&self, v: Var) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    /// `({}, 0)`: always true.
    pub fn is_trivial(&self) -> bool {
        self.vars.is_empty() && !self.rhs
    }

    /// `({}, 1)`: always false.
    pub fn is_contradiction(&self) -> bool {
        self.vars.is_empty() && self.rhs
    }

    /// Symmetric difference of the variable sets, XOR of the right-hand sides.
    pub fn add(&self, other: &Equation) -> Equation {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < other.vars.len() {
            match self.vars[i].cmp(&other.vars[j]) {
                std::cmp::Ordering::Less => {
                    vars.push(self.vars[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    vars.push(other.vars[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        vars.extend_from_slice(&self.vars[i..]);
        vars.extend_from_slice(&other.vars[j..]);
        Equation {
            vars,
            rhs: self.rhs ^ other.rhs,
        }
    }

    /// Removes `vars` from the equation without touching the parity.
    pub fn without(&self, drop: &BTreeSet<Var>) -> Equation {
        Equation {
            vars: self.vars.iter().copied().filter(|v| !drop.contains(v)).collect(),
            rhs: self.rhs,
        }
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        self.vars.iter().fold(false, |acc, &v| acc ^ value(v)) == self.rhs
    }

    /// Clausal encoding: one clause per assignment of the variables that
    /// violates the parity.
    pub fn to_clauses(&self) -> Vec<Clause> {
        let n = self.vars.len();
        assert!(n < 24, "parity constraint too wide for clausal expansion");
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let parity = mask.count_ones() % 2 == 1;
            if parity == self.rhs {
                continue;
            }
            let lits = self.vars.iter().enumerate().map(|(i, &v)| v.lit(mask >> i & 1 == 0));
            out.push(Clause { lits: lits.collect() });
        }
        out
    }

    fn restrict(&self, value: impl Fn(Var) -> Option<bool>) -> Equation {
        let mut rhs = self.rhs;
        let mut vars = Vec::with_capacity(self.vars.len());
        for &v in &self.vars {
            match value(v) {
                Some(b) => rhs ^= b,
                None => vars.push(v),
            }
        }
        Equation { vars, rhs }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vars.is_empty() {
            return write!(f, "(0 = {})", u8::from(self.rhs));
        }
        write!(f, "(")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, " ⊕ ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, " = {})", u8::from(self.rhs))
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Clause(Clause),
    Equation(Equation),
}

impl Atom {
    pub fn vars(&self) -> Box<dyn Iterator<Item = Var> + '_> {
        match self {
            Atom::Clause(c) => Box::new(c.vars()),
            Atom::Equation(e) => Box::new(e.vars().iter().copied()),
        }
    }

    pub fn as_clause(&self) -> Option<&Clause> {
        match self {
            Atom::Clause(c) => Some(c),
            Atom::Equation(_) => None,
        }
    }

    pub fn as_equation(&self) -> Option<&Equation> {
        match self {
            Atom::Equation(e) => Some(e),
            Atom::Clause(_) => None,
        }
    }

    /// Clausal form of the atom; equations expand to their parity clauses.
    pub fn to_clauses(&self) -> Vec<Clause> {
        match self {
            Atom::Clause(c) => vec![c.clone()],
            Atom::Equation(e) => e.to_clauses(),
        }
    }

    pub fn eval(&self, value: impl Fn(Var) -> bool) -> bool {
        match self {
            Atom::Clause(c) => c.lits().iter().any(|l| l.eval(value(l.var()))),
            Atom::Equation(e) => e.eval(value),
        }
    }

    fn restrict(&self, value: impl Fn(Var) -> Option<bool>) -> Option<Atom> {
        match self {
            Atom::Clause(c) => c.restrict(value).map(Atom::Clause),
            Atom::Equation(e) => {
                let e = e.restrict(value);
                (!e.is_trivial()).then_some(Atom::Equation(e))
            }
        }
    }
}

impl From<Clause> for Atom {
    fn from(c: Clause) -> Atom {
        Atom::Clause(c)
    }
}

impl From<Equation> for Atom {
    fn from(e: Equation) -> Atom {
        Atom::Equation(e)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Clause(c) => c.fmt(f),
            Atom::Equation(e) => e.fmt(f),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "∃",
            Quantifier::Forall => "∀",
        })
    }
}

/// Ordered quantifier block, outermost first.
#[derive(Clone, Debug, Default)]
pub struct Prefix {
    entries: Vec<(Var, Quantifier)>,
    position: HashMap<Var, usize>,
}

impl PartialEq for Prefix {
    fn eq(&self, other: &Prefix) -> bool {
        self.entries == other.entries
    }
}

impl Eq for Prefix {}

impl Prefix {
    pub fn new<I: IntoIterator<Item = (Var, Quantifier)>>(entries: I) -> Result<Prefix> {
        let mut p = Prefix::default();
        for (v, q) in entries {
            p.push(v, q)?;
        }
        Ok(p)
    }

    /// Appends `v` as the new innermost variable.
    pub fn push(&mut self, v: Var, q: Quantifier) -> Result<()> {
        if self.position.contains_key(&v) {
            return Err(Error::Precondition(format!("{v} quantified twice")));
        }
        self.position.insert(v, self.entries.len());
        self.entries.push((v, q));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Var, Quantifier)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Quantifier)> + '_ {
        self.entries.iter().copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn contains(&self, v: Var) -> bool {
        self.position.contains_key(&v)
    }

    pub fn position(&self, v: Var) -> Option<usize> {
        self.position.get(&v).copied()
    }

    pub fn quantifier(&self, v: Var) -> Option<Quantifier> {
        self.position(v).map(|i| self.entries[i].1)
    }

    pub fn is_universal(&self, v: Var) -> bool {
        self.quantifier(v) == Some(Quantifier::Forall)
    }

    pub fn is_existential(&self, v: Var) -> bool {
        self.quantifier(v) == Some(Quantifier::Exists)
    }

    pub fn outermost(&self) -> Option<(Var, Quantifier)> {
        self.entries.first().copied()
    }

    /// Latest-quantified variable among `vars`. Variables missing from the
    /// prefix are ignored.
    pub fn innermost_of<I: IntoIterator<Item = Var>>(&self, vars: I) -> Option<Var> {
        vars.into_iter()
            .filter_map(|v| self.position(v).map(|p| (p, v)))
            .max()
            .map(|(_, v)| v)
    }

    /// The prefix with every variable satisfying `drop` removed.
    pub fn without(&self, drop: impl Fn(Var) -> bool) -> Prefix {
        Prefix::new(self.iter().filter(|&(v, _)| !drop(v))).expect("subsequence of a valid prefix")
    }

    pub fn restricted_to(&self, keep: &BTreeSet<Var>) -> Prefix {
        self.without(|v| !keep.contains(&v))
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, q) in &self.entries {
            write!(f, "{q}{v}")?;
        }
        Ok(())
    }
}

/// A partial map from variables to truth values.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment {
    values: BTreeMap<Var, bool>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn insert(&mut self, v: Var, value: bool) -> Option<bool> {
        self.values.insert(v, value)
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.values.get(&v).copied()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.values.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, bool)> + '_ {
        self.values.iter().map(|(&v, &b)| (v, b))
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.values.keys().copied().collect()
    }

    /// Union of two assignments. On conflicting bindings `other` wins.
    pub fn union(&self, other: &Assignment) -> Assignment {
        let mut out = self.clone();
        out.values.extend(other.iter());
        out
    }
}

impl FromIterator<(Var, bool)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (Var, bool)>>(iter: T) -> Assignment {
        Assignment {
            values: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, b)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}↦{}", u8::from(b))?;
        }
        write!(f, "}}")
    }
}

/// Matrix split into the tractable part and the backdoor clauses.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Matrix {
    pub tractable: Vec<Atom>,
    pub backdoor: Vec<Clause>,
}

impl Matrix {
    pub fn new(tractable: Vec<Atom>, backdoor: Vec<Clause>) -> Matrix {
        Matrix { tractable, backdoor }
    }

    pub fn is_empty(&self) -> bool {
        self.tractable.is_empty() && self.backdoor.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tractable.len() + self.backdoor.len()
    }

    /// All atoms, tractable part first.
    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.tractable
            .iter()
            .cloned()
            .chain(self.backdoor.iter().cloned().map(Atom::Clause))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out: BTreeSet<Var> = self.tractable.iter().flat_map(|a| a.vars()).collect();
        out.extend(self.backdoor_vars());
        out
    }

    /// The clause-covering backdoor set: variables of the backdoor clauses.
    pub fn backdoor_vars(&self) -> BTreeSet<Var> {
        self.backdoor.iter().flat_map(|c| c.vars()).collect()
    }

    /// Whether some atom has been reduced to a constant false.
    pub fn has_falsified_atom(&self) -> bool {
        self.backdoor.iter().any(Clause::is_empty)
            || self.tractable.iter().any(|a| match a {
                Atom::Clause(c) => c.is_empty(),
                Atom::Equation(e) => e.is_contradiction(),
            })
    }
}

/// A closed prenex formula `prefix . (tractable ∧ backdoor)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QbfFormula {
    pub prefix: Prefix,
    pub matrix: Matrix,
    /// Class the tractable part is declared to belong to, if any.
    pub base_class: Option<BaseClass>,
}

impl QbfFormula {
    pub fn new(prefix: Prefix, matrix: Matrix, base_class: Option<BaseClass>) -> QbfFormula {
        QbfFormula {
            prefix,
            matrix,
            base_class,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.prefix.len()
    }

    /// Size of the clause-covering backdoor.
    pub fn k(&self) -> usize {
        self.matrix.backdoor_vars().len()
    }

    /// Largest variable id in the prefix or the matrix.
    pub fn max_var_id(&self) -> u32 {
        let m = self.matrix.vars().into_iter().map(Var::id).max().unwrap_or(0);
        self.prefix.vars().map(Var::id).max().unwrap_or(0).max(m)
    }

    /// Atoms of each partition sorted; two formulas that differ only in atom
    /// order compare equal after this.
    pub fn canonical(&self) -> QbfFormula {
        let mut out = self.clone();
        out.matrix.tractable.sort();
        out.matrix.backdoor.sort();
        out
    }

    pub fn apply(&self, tau: &Assignment) -> Result<QbfFormula> {
        apply_assignment(self, tau)
    }
}

impl fmt::Display for QbfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.prefix)?;
        let mut first = true;
        for a in self.matrix.atoms() {
            if !first {
                write!(f, " ∧ ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        if first {
            write!(f, "⊤")?;
        }
        Ok(())
    }
}

/// `Φ[τ]`: satisfied atoms are dropped, assigned variables are removed from
/// the remaining atoms and from the prefix. Clauses that lose all their
/// literals stay behind as empty clauses.
pub fn apply_assignment(formula: &QbfFormula, tau: &Assignment) -> Result<QbfFormula> {
    let vars = formula.matrix.vars();
    if let Some((v, _)) = tau
        .iter()
        .find(|&(v, _)| !formula.prefix.contains(v) && !vars.contains(&v))
    {
        return Err(Error::Domain(v));
    }
    let value = |v: Var| tau.get(v);
    let tractable = formula
        .matrix
        .tractable
        .iter()
        .filter_map(|a| a.restrict(value))
        .collect();
    let backdoor = formula
        .matrix
        .backdoor
        .iter()
        .filter_map(|c| c.restrict(value))
        .collect();
    Ok(QbfFormula {
        prefix: formula.prefix.without(|v| tau.contains(v)),
        matrix: Matrix::new(tractable, backdoor),
        base_class: formula.base_class,
    })
}

/// Ground evaluation of the matrix under an assignment binding all of its
/// variables.
pub fn eval_matrix(matrix: &Matrix, total: &Assignment) -> Result<bool> {
    if let Some(v) = matrix.vars().into_iter().find(|&v| !total.contains(v)) {
        return Err(Error::Unbound(v));
    }
    let value = |v: Var| total.get(v).unwrap_or(false);
    Ok(matrix.atoms().all(|a| a.eval(value)))
}

/// Partition of the matrix an atom sits in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Part {
    Tractable,
    Backdoor,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    /// Occurs in the matrix but not in the prefix.
    Unquantified(Var),
    /// Quantified but absent from the matrix; only reported when unused
    /// variables are disallowed.
    Unused(Var),
    TautologicalClause {
        part: Part,
        index: usize,
        var: Var,
    },
    NonCanonicalClause {
        part: Part,
        index: usize,
    },
    /// Tractable atom outside the declared base class.
    OutOfClass {
        index: usize,
        class: BaseClass,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unquantified(v) => write!(f, "{v} unquantified"),
            Violation::Unused(v) => write!(f, "{v} quantified but unused"),
            Violation::TautologicalClause { part, index, var } => {
                write!(f, "tautological clause ({part:?} #{index}) on {var}")
            }
            Violation::NonCanonicalClause { part, index } => {
                write!(f, "clause {part:?} #{index} not in canonical order")
            }
            Violation::OutOfClass { index, class } => {
                write!(f, "tractable atom #{index} is not in {class}")
            }
        }
    }
}

/// Structural check of a formula; an empty result means valid. Quantified
/// variables that do not occur in the matrix are allowed.
pub fn validate(formula: &QbfFormula) -> Vec<Violation> {
    validate_with(formula, true)
}

pub fn validate_with(formula: &QbfFormula, allow_unused: bool) -> Vec<Violation> {
    let mut out = Vec::new();
    let vars = formula.matrix.vars();
    out.extend(
        vars.iter()
            .filter(|&&v| !formula.prefix.contains(v))
            .map(|&v| Violation::Unquantified(v)),
    );
    if !allow_unused {
        out.extend(
            formula
                .prefix
                .vars()
                .filter(|v| !vars.contains(v))
                .map(Violation::Unused),
        );
    }
    let clauses = formula
        .matrix
        .tractable
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.as_clause().map(|c| (Part::Tractable, i, c)))
        .chain(
            formula
                .matrix
                .backdoor
                .iter()
                .enumerate()
                .map(|(i, c)| (Part::Backdoor, i, c)),
        );
    for (part, index, c) in clauses {
        if let Some(var) = c.tautology_witness() {
            out.push(Violation::TautologicalClause { part, index, var });
        } else if !c.is_canonical() {
            out.push(Violation::NonCanonicalClause { part, index });
        }
    }
    if let Some(class) = formula.base_class {
        for (index, a) in formula.matrix.tractable.iter().enumerate() {
            if !atom_in_class(a, class) {
                out.push(Violation::OutOfClass { index, class });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::backdoor_example;

    fn v(i: u32) -> Var {
        Var::new(i)
    }

    fn cl(lits: &[i64]) -> Clause {
        Clause::from_dimacs(lits).unwrap()
    }

    #[test]
    fn double_negation() {
        let l = v(3).neg();
        assert_eq!(!!l, l);
        assert_eq!(Lit::from_dimacs(-3), Some(l));
        assert_eq!(l.to_dimacs(), -3);
    }

    #[test]
    fn clause_is_sorted_and_deduplicated() {
        let c = cl(&[3, -1, 3, 2]);
        assert_eq!(c.lits(), &[v(1).neg(), v(2).pos(), v(3).pos()]);
    }

    #[test]
    fn tautology_is_rejected() {
        assert_eq!(Clause::from_dimacs(&[1, -1]), Err(Error::Tautology(v(1))));
    }

    #[test]
    fn equation_duplicates_cancel() {
        let e = Equation::new([v(2), v(1), v(2)], true);
        assert_eq!(e.vars(), &[v(1)]);
        let e = Equation::from_lits([v(1).pos(), v(2).neg()]);
        assert_eq!(e, Equation::new([v(1), v(2)], false));
    }

    #[test]
    fn equation_clauses_encode_parity() {
        let e = Equation::new([v(1), v(2), v(3)], true);
        let clauses = e.to_clauses();
        assert_eq!(clauses.len(), 4);
        for mask in 0..8u32 {
            let val = |x: Var| mask >> (x.id() - 1) & 1 == 1;
            let by_clauses = clauses.iter().all(|c| Atom::Clause(c.clone()).eval(val));
            assert_eq!(by_clauses, e.eval(val));
        }
        assert_eq!(Equation::new([], true).to_clauses(), vec![Clause::empty()]);
        assert!(Equation::new([], false).to_clauses().is_empty());
    }

    #[test]
    fn satisfied_unit_disappears() {
        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists)]).unwrap(),
            Matrix::new(vec![cl(&[1]).into()], vec![]),
            None,
        );
        let g = apply_assignment(&f, &[(v(1), true)].into_iter().collect()).unwrap();
        assert!(g.prefix.is_empty());
        assert!(g.matrix.is_empty());
    }

    #[test]
    fn example_branch_residual() {
        let f = backdoor_example();
        let tau: Assignment = [(v(1), false), (v(3), true)].into_iter().collect();
        let g = apply_assignment(&f, &tau).unwrap();
        let expected_prefix = Prefix::new([
            (v(2), Quantifier::Forall),
            (v(4), Quantifier::Exists),
            (v(5), Quantifier::Exists),
        ])
        .unwrap();
        assert_eq!(g.prefix, expected_prefix);
        assert_eq!(g.matrix.tractable, vec![Atom::Clause(cl(&[2, 5]))]);
        assert_eq!(g.matrix.backdoor, vec![cl(&[-4, -5])]);
    }

    #[test]
    fn parity_update() {
        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists), (v(2), Quantifier::Exists)]).unwrap(),
            Matrix::new(vec![Equation::new([v(1), v(2)], true).into()], vec![]),
            None,
        );
        let g = apply_assignment(&f, &[(v(1), true)].into_iter().collect()).unwrap();
        assert_eq!(g.matrix.tractable, vec![Equation::new([v(2)], false).into()]);
    }

    #[test]
    fn falsified_clause_stays_as_empty() {
        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists)]).unwrap(),
            Matrix::new(vec![], vec![cl(&[1])]),
            None,
        );
        let g = apply_assignment(&f, &[(v(1), false)].into_iter().collect()).unwrap();
        assert_eq!(g.matrix.backdoor, vec![Clause::empty()]);
        assert!(g.matrix.has_falsified_atom());
    }

    #[test]
    fn foreign_variable_is_a_domain_error() {
        let f = backdoor_example();
        let tau: Assignment = [(v(9), true)].into_iter().collect();
        assert_eq!(apply_assignment(&f, &tau), Err(Error::Domain(v(9))));
    }

    #[test]
    fn ground_evaluation() {
        let m = Matrix::new(vec![cl(&[1, 2]).into()], vec![]);
        let a: Assignment = [(v(1), false), (v(2), true)].into_iter().collect();
        assert_eq!(eval_matrix(&m, &a), Ok(true));

        let m = Matrix::new(vec![Equation::new([v(1), v(2)], true).into()], vec![]);
        let a: Assignment = [(v(1), true), (v(2), true)].into_iter().collect();
        assert_eq!(eval_matrix(&m, &a), Ok(false));

        let f = backdoor_example();
        let a: Assignment = (1..=5).map(|i| (v(i), i != 2)).collect();
        assert_eq!(eval_matrix(&f.matrix, &a), Ok(false));

        let a: Assignment = [(v(1), true)].into_iter().collect();
        assert_eq!(eval_matrix(&f.matrix, &a), Err(Error::Unbound(v(2))));
    }

    #[test]
    fn validation_reports() {
        assert!(validate(&backdoor_example()).is_empty());

        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists)]).unwrap(),
            Matrix::new(vec![cl(&[1, 2]).into()], vec![]),
            None,
        );
        assert_eq!(validate(&f), vec![Violation::Unquantified(v(2))]);
        assert_eq!(validate(&f)[0].to_string(), "x2 unquantified");

        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists)]).unwrap(),
            Matrix::new(vec![Clause::new_unchecked(vec![v(1).pos(), v(1).neg()]).into()], vec![]),
            None,
        );
        assert!(matches!(
            validate(&f)[..],
            [Violation::TautologicalClause { var, .. }] if var == v(1)
        ));
    }

    #[test]
    fn unused_prefix_variables() {
        let f = QbfFormula::new(
            Prefix::new([(v(1), Quantifier::Exists), (v(2), Quantifier::Forall)]).unwrap(),
            Matrix::new(vec![cl(&[1]).into()], vec![]),
            None,
        );
        assert!(validate(&f).is_empty());
        assert_eq!(validate_with(&f, false), vec![Violation::Unused(v(2))]);
    }
}
