//! Exhaustive game-tree evaluation with winning-strategy extraction.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, ParseError, Result};
use crate::formula::{eval_matrix, Assignment, Atom, QbfFormula, Quantifier, Var};
use crate::stats::SolveStats;

/// Default limit on the number of quantified variables.
pub const DEFAULT_CAP: usize = 24;
/// Default limit on the prefix length for explicit strategy trees.
pub const DEFAULT_STRATEGY_CAP: usize = 20;
const HARD_CAP: usize = 63;

/// Matrix compiled to bit masks over prefix positions.
struct Compiled {
    n: usize,
    universal: u64,
    /// Atoms grouped by the position of their innermost variable; atoms with
    /// no variables sit in `ground`.
    buckets: Vec<Vec<Mask>>,
    ground: Vec<Mask>,
}

#[derive(Clone, Copy)]
enum Mask {
    Clause { pos: u64, neg: u64 },
    Parity { vars: u64, rhs: bool },
}

impl Mask {
    fn holds(self, a: u64) -> bool {
        match self {
            Mask::Clause { pos, neg } => a & pos != 0 || !a & neg != 0,
            Mask::Parity { vars, rhs } => ((a & vars).count_ones() % 2 == 1) == rhs,
        }
    }
}

impl Compiled {
    fn new(formula: &QbfFormula, cap: usize) -> Result<Compiled> {
        let n = formula.prefix.len();
        let cap = cap.min(HARD_CAP);
        if n > cap {
            return Err(Error::Cap { size: n, cap });
        }
        let bit = |v: Var| -> Result<usize> { formula.prefix.position(v).ok_or(Error::Unbound(v)) };
        let mut buckets = vec![Vec::new(); n];
        let mut ground = Vec::new();
        for atom in formula.matrix.atoms() {
            let (mask, last) = match &atom {
                Atom::Clause(c) => {
                    let (mut pos, mut neg, mut last) = (0u64, 0u64, None);
                    for l in c.lits() {
                        let b = bit(l.var())?;
                        last = last.max(Some(b));
                        if l.is_positive() {
                            pos |= 1 << b;
                        } else {
                            neg |= 1 << b;
                        }
                    }
                    (Mask::Clause { pos, neg }, last)
                }
                Atom::Equation(e) => {
                    let (mut vars, mut last) = (0u64, None);
                    for &v in e.vars() {
                        let b = bit(v)?;
                        last = last.max(Some(b));
                        vars |= 1 << b;
                    }
                    (Mask::Parity { vars, rhs: e.rhs() }, last)
                }
            };
            match last {
                Some(b) => buckets[b].push(mask),
                None => ground.push(mask),
            }
        }
        let universal = formula
            .prefix
            .iter()
            .enumerate()
            .filter(|(_, (_, q))| *q == Quantifier::Forall)
            .fold(0u64, |m, (i, _)| m | 1 << i);
        Ok(Compiled {
            n,
            universal,
            buckets,
            ground,
        })
    }

    fn is_universal(&self, depth: usize) -> bool {
        self.universal >> depth & 1 == 1
    }

    /// Value of the game after positions `< depth` have been fixed to
    /// `assigned`. Atoms are checked as soon as their last variable is set.
    fn eval(&self, depth: usize, assigned: u64, leaves: &mut u64) -> bool {
        if depth == self.n {
            *leaves += 1;
            return true;
        }
        let forall = self.is_universal(depth);
        for b in [false, true] {
            let a = assigned | u64::from(b) << depth;
            let value = if self.buckets[depth].iter().all(|m| m.holds(a)) {
                self.eval(depth + 1, a, leaves)
            } else {
                *leaves += 1;
                false
            };
            if value != forall {
                return value;
            }
        }
        forall
    }

    fn value(&self, leaves: &mut u64) -> bool {
        if !self.ground.iter().all(|m| m.holds(0)) {
            *leaves += 1;
            return false;
        }
        self.eval(0, 0, leaves)
    }
}

/// Truth value by exhaustive play, limited to [`DEFAULT_CAP`] variables.
pub fn eval_bruteforce(formula: &QbfFormula) -> Result<bool> {
    eval_bruteforce_capped(formula, DEFAULT_CAP)
}

pub fn eval_bruteforce_capped(formula: &QbfFormula, cap: usize) -> Result<bool> {
    eval_bruteforce_stats(formula, cap).map(|(v, _)| v)
}

/// Like [`eval_bruteforce_capped`], also counting the terminal positions
/// visited.
pub fn eval_bruteforce_stats(formula: &QbfFormula, cap: usize) -> Result<(bool, SolveStats)> {
    let c = Compiled::new(formula, cap)?;
    let mut leaves = 0;
    let value = c.value(&mut leaves);
    let stats = SolveStats {
        leaves,
        max_depth: c.n as u64,
        initial_k: formula.k() as u64,
        ..SolveStats::default()
    };
    Ok((value, stats))
}

/// Subtree of a strategy: a leaf carries the value of the matrix, an inner
/// node lists one child per value its variable may take.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyTree {
    Leaf(bool),
    Node {
        var: Var,
        children: Vec<(bool, StrategyTree)>,
    },
}

impl StrategyTree {
    pub fn node_count(&self) -> usize {
        match self {
            StrategyTree::Leaf(_) => 1,
            StrategyTree::Node { children, .. } => 1 + children.iter().map(|(_, t)| t.node_count()).sum::<usize>(),
        }
    }
}

/// A winning strategy for `winner`: its own variables get one child, the
/// opponent's get both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub winner: Quantifier,
    pub root: StrategyTree,
}

pub fn extract_strategy(formula: &QbfFormula) -> Result<Strategy> {
    extract_strategy_capped(formula, DEFAULT_STRATEGY_CAP)
}

pub fn extract_strategy_capped(formula: &QbfFormula, cap: usize) -> Result<Strategy> {
    let c = Compiled::new(formula, cap)?;
    let mut scratch = 0;
    let winner = if c.value(&mut scratch) {
        Quantifier::Exists
    } else {
        Quantifier::Forall
    };
    let vars: Vec<Var> = formula.prefix.vars().collect();
    let root = build(&c, &vars, 0, 0, winner);
    Ok(Strategy { winner, root })
}

/// Whether the game from this position is won by the existential player.
fn subgame(c: &Compiled, depth: usize, assigned: u64) -> bool {
    let mut scratch = 0;
    (depth == 0 || c.buckets[depth - 1].iter().all(|m| m.holds(assigned)))
        && c.ground.iter().all(|m| m.holds(0))
        && c.eval(depth, assigned, &mut scratch)
}

fn build(c: &Compiled, vars: &[Var], depth: usize, assigned: u64, winner: Quantifier) -> StrategyTree {
    if depth == c.n {
        return StrategyTree::Leaf(winner == Quantifier::Exists);
    }
    let own = c.is_universal(depth) == (winner == Quantifier::Forall);
    let wins = |a: u64| subgame(c, depth + 1, a) == (winner == Quantifier::Exists);
    let values: Vec<bool> = if own {
        let b = [true, false]
            .into_iter()
            .find(|&b| wins(assigned | u64::from(b) << depth))
            .expect("the winner has a winning move");
        vec![b]
    } else {
        vec![false, true]
    };
    let children = values
        .into_iter()
        .map(|b| (b, build(c, vars, depth + 1, assigned | u64::from(b) << depth, winner)))
        .collect();
    StrategyTree::Node {
        var: vars[depth],
        children,
    }
}

/// Checks that `strategy` follows the prefix and wins every play.
///
/// Returns `Ok(false)` for a well-shaped tree that loses somewhere or
/// carries a leaf label other than the winner's, and [`Error::Shape`] when
/// the tree does not match the prefix.
pub fn verify_strategy(formula: &QbfFormula, strategy: &Strategy) -> Result<bool> {
    let prefix: Vec<(Var, Quantifier)> = formula.prefix.iter().collect();
    let mut tau = Assignment::new();
    walk(formula, &prefix, 0, &strategy.root, strategy.winner, &mut tau)
}

fn walk(
    formula: &QbfFormula,
    prefix: &[(Var, Quantifier)],
    depth: usize,
    tree: &StrategyTree,
    winner: Quantifier,
    tau: &mut Assignment,
) -> Result<bool> {
    match tree {
        StrategyTree::Leaf(label) => {
            if depth != prefix.len() {
                return Err(Error::Shape(format!(
                    "leaf at depth {depth}, prefix has {}",
                    prefix.len()
                )));
            }
            let claimed = winner == Quantifier::Exists;
            Ok(*label == claimed && eval_matrix(&formula.matrix, tau)? == claimed)
        }
        StrategyTree::Node { var, children } => {
            let Some(&(expected, q)) = prefix.get(depth) else {
                return Err(Error::Shape(format!("node {var} below the last prefix variable")));
            };
            if *var != expected {
                return Err(Error::Shape(format!("node {var} where {expected} is quantified")));
            }
            let mut values: Vec<bool> = children.iter().map(|c| c.0).collect();
            values.sort_unstable();
            let shape_ok = if q == winner {
                values.len() == 1
            } else {
                values == [false, true]
            };
            if !shape_ok {
                return Err(Error::Shape(format!("{var} has {} children", values.len())));
            }
            for (b, child) in children {
                tau.insert(*var, *b);
                let ok = walk(formula, prefix, depth + 1, child, winner, tau)?;
                if !ok {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

impl fmt::Display for StrategyTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyTree::Leaf(b) => f.write_str(if *b { "T" } else { "F" }),
            StrategyTree::Node { var, children } => {
                for (b, child) in children {
                    write!(f, "({var}={} {child})", u8::from(*b))?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Parses the text written by [`Strategy`]'s `Display`, e.g.
/// `(x1=1 (x2=0 T)(x2=1 T))`. The winner is read off the leaf labels.
impl FromStr for Strategy {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Strategy, ParseError> {
        let mut p = TreeParser { s: s.as_bytes(), i: 0 };
        let root = p.tree()?;
        p.skip_ws();
        if p.i != p.s.len() {
            return Err(p.error("trailing input"));
        }
        let mut label = None;
        let mut stack = vec![&root];
        while let Some(t) = stack.pop() {
            match t {
                StrategyTree::Leaf(b) => match label {
                    None => label = Some(*b),
                    Some(l) if l != *b => return Err(ParseError::new(1, 1, "leaves carry both labels")),
                    Some(_) => {}
                },
                StrategyTree::Node { children, .. } => stack.extend(children.iter().map(|c| &c.1)),
            }
        }
        let winner = if label.expect("a tree has a leaf") {
            Quantifier::Exists
        } else {
            Quantifier::Forall
        };
        Ok(Strategy { winner, root })
    }
}

struct TreeParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl TreeParser<'_> {
    fn error(&self, msg: &str) -> ParseError {
        ParseError::new(1, self.i + 1, msg)
    }

    fn skip_ws(&mut self) {
        while self.s.get(self.i).is_some_and(u8::is_ascii_whitespace) {
            self.i += 1;
        }
    }

    fn tree(&mut self) -> std::result::Result<StrategyTree, ParseError> {
        self.skip_ws();
        match self.s.get(self.i) {
            Some(b'T') => {
                self.i += 1;
                Ok(StrategyTree::Leaf(true))
            }
            Some(b'F') => {
                self.i += 1;
                Ok(StrategyTree::Leaf(false))
            }
            Some(b'(') => {
                let mut var = None;
                let mut children = Vec::new();
                while self.s.get(self.i) == Some(&b'(') {
                    self.i += 1;
                    let (v, b) = self.binding()?;
                    if var.is_some_and(|w| w != v) {
                        return Err(self.error("siblings bind different variables"));
                    }
                    var = Some(v);
                    let child = self.tree()?;
                    self.skip_ws();
                    if self.s.get(self.i) != Some(&b')') {
                        return Err(self.error("expected ')'"));
                    }
                    self.i += 1;
                    children.push((b, child));
                    self.skip_ws();
                }
                Ok(StrategyTree::Node {
                    var: var.expect("loop ran once"),
                    children,
                })
            }
            _ => Err(self.error("expected 'T', 'F' or '('")),
        }
    }

    fn binding(&mut self) -> std::result::Result<(Var, bool), ParseError> {
        self.skip_ws();
        if self.s.get(self.i) != Some(&b'x') {
            return Err(self.error("expected a variable like x3"));
        }
        self.i += 1;
        let start = self.i;
        while self.s.get(self.i).is_some_and(u8::is_ascii_digit) {
            self.i += 1;
        }
        let id: u32 = std::str::from_utf8(&self.s[start..self.i])
            .expect("ascii digits")
            .parse()
            .map_err(|_| self.error("bad variable index"))?;
        if id == 0 {
            return Err(self.error("variable indices start at 1"));
        }
        if self.s.get(self.i) != Some(&b'=') {
            return Err(self.error("expected '='"));
        }
        self.i += 1;
        let b = match self.s.get(self.i) {
            Some(b'0') => false,
            Some(b'1') => true,
            _ => return Err(self.error("expected 0 or 1")),
        };
        self.i += 1;
        Ok((Var::new(id), b))
    }
}
