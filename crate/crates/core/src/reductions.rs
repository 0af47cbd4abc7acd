//! Formula transformations and generators: multipartite independent set
//! encodings, Horn clause splitting, dualization and seeded random
//! instances.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backdoor::{clause_in_class, BaseClass};
use crate::error::{Error, ParseError, Result};
use crate::formula::{Atom, Clause, Equation, Lit, Matrix, Prefix, QbfFormula, Quantifier, Var};

/// Default limit on the number of transversals [`mis_bruteforce`] visits.
pub const DEFAULT_MIS_CAP: u64 = 1 << 24;

/// A graph whose vertices are split into `k` nonempty parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedGraph {
    parts: Vec<Vec<u32>>,
    edges: BTreeSet<(u32, u32)>,
}

impl PartitionedGraph {
    /// Edges are unordered; each is stored once with the smaller endpoint
    /// first.
    pub fn new(parts: Vec<Vec<u32>>, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<PartitionedGraph> {
        let mut seen = BTreeSet::new();
        for p in &parts {
            if p.is_empty() {
                return Err(Error::Graph("empty part".into()));
            }
            for &v in p {
                if !seen.insert(v) {
                    return Err(Error::Graph(format!("vertex {v} listed twice")));
                }
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::Graph(format!("self-loop on {a}")));
            }
            for v in [a, b] {
                if !seen.contains(&v) {
                    return Err(Error::Graph(format!("edge endpoint {v} is not in any part")));
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(PartitionedGraph { parts, edges: set })
    }

    pub fn parts(&self) -> &[Vec<u32>] {
        &self.parts
    }

    pub fn edges(&self) -> &BTreeSet<(u32, u32)> {
        &self.edges
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = u32> + '_ {
        self.parts.iter().flatten().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.iter().map(Vec::len).sum()
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Variable `y_v` of each vertex: ids `1..=N` in part order.
    fn y_vars(&self) -> BTreeMap<u32, Var> {
        self.vertices()
            .enumerate()
            .map(|(i, v)| (v, Var::new(i as u32 + 1)))
            .collect()
    }
}

impl fmt::Display for PartitionedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parts")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " |")?;
            }
            for v in p {
                write!(f, " {v}")?;
            }
        }
        writeln!(f)?;
        for (a, b) in &self.edges {
            writeln!(f, "{a} {b}")?;
        }
        Ok(())
    }
}

/// Reads `parts 1 2 | 3 4` followed by one `u v` edge per line; `#` starts
/// a comment.
impl FromStr for PartitionedGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<PartitionedGraph> {
        let mut parts: Option<Vec<Vec<u32>>> = None;
        let mut edges = Vec::new();
        for (ln, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse(ParseError::new(ln + 1, 1, m));
            let num = |t: &str| t.parse::<u32>().map_err(|_| err(&format!("bad vertex '{t}'")));
            if let Some(rest) = line.strip_prefix("parts") {
                if parts.is_some() {
                    return Err(err("second parts line"));
                }
                let ps = rest
                    .split('|')
                    .map(|p| p.split_whitespace().map(num).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                parts = Some(ps);
            } else {
                if parts.is_none() {
                    return Err(err("edge before the parts line"));
                }
                let ts: Vec<&str> = line.split_whitespace().collect();
                let [a, b] = ts[..] else {
                    return Err(err("expected two vertices"));
                };
                edges.push((num(a)?, num(b)?));
            }
        }
        let parts = parts.ok_or_else(|| Error::Graph("missing parts line".into()))?;
        PartitionedGraph::new(parts, edges)
    }
}

/// Whether some choice of one vertex per part is pairwise non-adjacent.
pub fn mis_bruteforce(g: &PartitionedGraph) -> Result<bool> {
    mis_bruteforce_capped(g, DEFAULT_MIS_CAP)
}

pub fn mis_bruteforce_capped(g: &PartitionedGraph, cap: u64) -> Result<bool> {
    let total = g
        .parts
        .iter()
        .try_fold(1u64, |acc, p| acc.checked_mul(p.len() as u64))
        .unwrap_or(u64::MAX);
    if total > cap {
        return Err(Error::Cap {
            size: usize::try_from(total).unwrap_or(usize::MAX),
            cap: usize::try_from(cap).unwrap_or(usize::MAX),
        });
    }
    fn extend(g: &PartitionedGraph, i: usize, chosen: &mut Vec<u32>) -> bool {
        if i == g.parts.len() {
            return true;
        }
        for &v in &g.parts[i] {
            if chosen.iter().all(|&u| !g.adjacent(u, v)) {
                chosen.push(v);
                if extend(g, i + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    Ok(extend(g, 0, &mut Vec::new()))
}

fn clause(lits: impl IntoIterator<Item = Lit>) -> Clause {
    Clause::new(lits).expect("construction yields distinct variables")
}

/// `∀y ∃x`: the Horn clause `y_v ∨ ⋁¬y_u (u ∈ N(v)) ∨ ¬x_i` for each vertex
/// `v` of part `i`, and the backdoor clause `x_1 ∨ … ∨ x_k`. False iff the
/// graph has a multipartite independent set.
pub fn mis_to_horn(g: &PartitionedGraph) -> Result<QbfFormula> {
    if g.k() == 0 {
        return Err(Error::Graph("no parts".into()));
    }
    let y = g.y_vars();
    let n = y.len() as u32;
    let x: Vec<Var> = (1..=g.k() as u32).map(|i| Var::new(n + i)).collect();
    let mut tractable = Vec::new();
    for (i, part) in g.parts.iter().enumerate() {
        for &v in part {
            let lits = std::iter::once(y[&v].pos())
                .chain(g.neighbors(v).map(|u| y[&u].neg()))
                .chain(std::iter::once(x[i].neg()));
            tractable.push(Atom::Clause(clause(lits)));
        }
    }
    let prefix = Prefix::new(
        y.values()
            .map(|&v| (v, Quantifier::Forall))
            .chain(x.iter().map(|&v| (v, Quantifier::Exists))),
    )?;
    let backdoor = vec![clause(x.iter().map(|v| v.pos()))];
    Ok(QbfFormula::new(
        prefix,
        Matrix::new(tractable, backdoor),
        Some(BaseClass::Horn),
    ))
}

/// `∀y ∃x ∃z`: for vertex `v` of part `i` the negative clause
/// `⋁¬y_w (w ∈ V_i∖{v}) ∨ ⋁¬y_u (u ∈ N(v)) ∨ ¬x_i`, the implications
/// `z_i → y_v` for `v ∈ V_i`, and the backdoor clause
/// `x_1 ∨ … ∨ x_k ∨ z_1 ∨ … ∨ z_k`. False iff the graph has a multipartite
/// independent set.
pub fn mis_to_ihsb_minus(g: &PartitionedGraph) -> Result<QbfFormula> {
    let k = g.k() as u32;
    if k == 0 {
        return Err(Error::Graph("no parts".into()));
    }
    let y = g.y_vars();
    let n = y.len() as u32;
    let x: Vec<Var> = (1..=k).map(|i| Var::new(n + i)).collect();
    let z: Vec<Var> = (1..=k).map(|i| Var::new(n + k + i)).collect();
    let mut tractable = Vec::new();
    for (i, part) in g.parts.iter().enumerate() {
        for &v in part {
            let others = part.iter().filter(|&&w| w != v).map(|w| y[w].neg());
            let lits = others
                .chain(g.neighbors(v).map(|u| y[&u].neg()))
                .chain(std::iter::once(x[i].neg()));
            tractable.push(Atom::Clause(clause(lits)));
        }
        for &v in part {
            tractable.push(Atom::Clause(clause([z[i].neg(), y[&v].pos()])));
        }
    }
    let prefix = Prefix::new(
        y.values()
            .map(|&v| (v, Quantifier::Forall))
            .chain(x.iter().chain(&z).map(|&v| (v, Quantifier::Exists))),
    )?;
    let backdoor = vec![clause(x.iter().chain(&z).map(|v| v.pos()))];
    Ok(QbfFormula::new(
        prefix,
        Matrix::new(tractable, backdoor),
        Some(BaseClass::IhsbMinus),
    ))
}

/// Splits every tractable Horn clause wider than three literals.
///
/// A clause `h ∨ l2 ∨ rest` becomes `h ∨ l2 ∨ ¬v` and `v ∨ rest` for a
/// fresh innermost existential `v`, where `h` is the positive literal if
/// there is one. Repeats until all tractable clauses have at most three
/// literals.
pub fn horn_to_3horn(formula: &QbfFormula) -> Result<QbfFormula> {
    let mut next = formula.max_var_id();
    let mut prefix = formula.prefix.clone();
    let mut out = Vec::with_capacity(formula.matrix.tractable.len());
    for atom in &formula.matrix.tractable {
        let Atom::Clause(c) = atom else {
            return Err(Error::Class(format!("{atom} is not a Horn clause")));
        };
        if !clause_in_class(c, BaseClass::Horn) {
            return Err(Error::Class(format!("{c} is not a Horn clause")));
        }
        let mut c = c.clone();
        while c.len() > 3 {
            let head = c
                .lits()
                .iter()
                .copied()
                .find(|l| l.is_positive())
                .unwrap_or(c.lits()[0]);
            let mut rest: Vec<Lit> = c.lits().iter().copied().filter(|&l| l != head).collect();
            let second = rest.remove(0);
            next += 1;
            let v = Var::new(next);
            prefix.push(v, Quantifier::Exists)?;
            out.push(Atom::Clause(clause([head, second, v.neg()])));
            c = clause(std::iter::once(v.pos()).chain(rest));
        }
        out.push(Atom::Clause(c));
    }
    let base_class = match formula.base_class {
        None | Some(BaseClass::Horn) | Some(BaseClass::DHorn(_)) => Some(BaseClass::DHorn(3)),
        other => other,
    };
    Ok(QbfFormula::new(
        prefix,
        Matrix::new(out, formula.matrix.backdoor.clone()),
        base_class,
    ))
}

/// Flips every literal; an equation `(A, b)` becomes `(A, b ⊕ |A| mod 2)`.
/// The truth value is unchanged and applying it twice gives the input back.
pub fn dualize(formula: &QbfFormula) -> QbfFormula {
    let flip = |c: &Clause| clause(c.lits().iter().map(|&l| !l));
    let tractable = formula
        .matrix
        .tractable
        .iter()
        .map(|a| match a {
            Atom::Clause(c) => Atom::Clause(flip(c)),
            Atom::Equation(e) => Atom::Equation(Equation::new(
                e.vars().iter().copied(),
                e.rhs() ^ (e.vars().len() % 2 == 1),
            )),
        })
        .collect();
    QbfFormula::new(
        formula.prefix.clone(),
        Matrix::new(tractable, formula.matrix.backdoor.iter().map(flip).collect()),
        formula.base_class.and_then(BaseClass::dual),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrefixPattern {
    /// Each variable is universal with the given probability.
    Random {
        forall: f64,
    },
    /// `∃∀∃∀…` by variable id.
    Alternating,
    Existential,
}

/// Parameters for [`gen_random`].
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n: usize,
    /// Size of the variable subset the backdoor clauses are drawn from.
    pub k: usize,
    pub class: BaseClass,
    pub tractable_atoms: usize,
    pub backdoor_clauses: usize,
    /// Widest backdoor clause.
    pub max_width: usize,
    pub prefix: PrefixPattern,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            n: 8,
            k: 3,
            class: BaseClass::TwoCnf,
            tractable_atoms: 8,
            backdoor_clauses: 2,
            max_width: 4,
            prefix: PrefixPattern::Random { forall: 0.3 },
        }
    }
}

/// A random formula with its tractable part inside `params.class` and its
/// backdoor clauses over a random `k`-subset of the variables. The same
/// seed always gives the same formula.
pub fn gen_random(params: &GenParams, seed: u64) -> Result<QbfFormula> {
    let GenParams { n, k, class, .. } = *params;
    if n == 0 || n > 1 << 20 {
        return Err(Error::Param(format!("n = {n} out of range")));
    }
    if k > n {
        return Err(Error::Param(format!("k = {k} exceeds n = {n}")));
    }
    if params.max_width == 0 && params.backdoor_clauses > 0 && k > 0 {
        return Err(Error::Param("max_width must be positive".into()));
    }
    if let PrefixPattern::Random { forall } = params.prefix {
        if !(0.0..=1.0).contains(&forall) {
            return Err(Error::Param(format!("probability {forall} out of range")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<Var> = (1..=n as u32).map(Var::new).collect();

    let prefix = Prefix::new(vars.iter().enumerate().map(|(i, &v)| {
        let forall = match params.prefix {
            PrefixPattern::Random { forall } => rng.gen_bool(forall),
            PrefixPattern::Alternating => i % 2 == 1,
            PrefixPattern::Existential => false,
        };
        (v, if forall { Quantifier::Forall } else { Quantifier::Exists })
    }))?;

    let tractable = (0..params.tractable_atoms)
        .map(|_| sample_atom(&mut rng, &vars, class))
        .collect();

    let subset: Vec<Var> = vars.choose_multiple(&mut rng, k).copied().collect();
    let mut backdoor = Vec::new();
    if k > 0 {
        let hi = k.min(params.max_width);
        let lo = hi.min(3);
        for _ in 0..params.backdoor_clauses {
            let w = rng.gen_range(lo..=hi);
            let picked = subset.choose_multiple(&mut rng, w);
            backdoor.push(clause(picked.map(|&v| v.lit(rng.gen()))));
        }
    }
    Ok(QbfFormula::new(prefix, Matrix::new(tractable, backdoor), Some(class)))
}

fn random_lits(
    rng: &mut ChaCha8Rng,
    vars: &[Var],
    width: usize,
    sign: impl Fn(&mut ChaCha8Rng, usize) -> bool,
) -> Clause {
    let width = width.min(vars.len());
    let picked: Vec<Var> = vars.choose_multiple(rng, width).copied().collect();
    clause(picked.into_iter().enumerate().map(|(i, v)| {
        let s = sign(rng, i);
        v.lit(s)
    }))
}

fn sample_atom(rng: &mut ChaCha8Rng, vars: &[Var], class: BaseClass) -> Atom {
    let dual = |c: Clause| clause(c.lits().iter().map(|&l| !l));
    let c = match class {
        BaseClass::Aff => {
            let w = rng.gen_range(1..=3.min(vars.len()));
            let picked = vars.choose_multiple(rng, w).copied();
            let rhs = rng.gen();
            return Atom::Equation(Equation::new(picked, rhs));
        }
        BaseClass::TwoCnf => {
            let w = if rng.gen_bool(0.15) { 1 } else { 2 };
            random_lits(rng, vars, w, |r, _| r.gen())
        }
        BaseClass::Horn | BaseClass::DualHorn | BaseClass::DHorn(_) => {
            let cap = if let BaseClass::DHorn(d) = class { d as usize } else { 4 };
            let w = rng.gen_range(1..=cap);
            let head = rng.gen_bool(0.6);
            let c = random_lits(rng, vars, w, |_, i| head && i == 0);
            if class == BaseClass::DualHorn {
                dual(c)
            } else {
                c
            }
        }
        BaseClass::IhsbMinus | BaseClass::IhsbPlus | BaseClass::DIhsbMinus(_) | BaseClass::DIhsbPlus(_) => {
            let cap = match class {
                BaseClass::DIhsbMinus(d) | BaseClass::DIhsbPlus(d) => d as usize,
                _ => 4,
            };
            let c = match rng.gen_range(0..3) {
                0 => random_lits(rng, vars, 1, |r, _| r.gen()),
                1 => random_lits(rng, vars, 2, |_, i| i == 0),
                _ => {
                    let w = rng.gen_range(1..=cap);
                    random_lits(rng, vars, w, |_, _| false)
                }
            };
            if matches!(class, BaseClass::IhsbPlus | BaseClass::DIhsbPlus(_)) {
                dual(c)
            } else {
                c
            }
        }
        BaseClass::PosAndNegUnits | BaseClass::NegAndPosUnits => {
            let c = if rng.gen_bool(0.2) {
                random_lits(rng, vars, 1, |_, _| false)
            } else {
                let w = rng.gen_range(1..=4);
                random_lits(rng, vars, w, |_, _| true)
            };
            if class == BaseClass::NegAndPosUnits {
                dual(c)
            } else {
                c
            }
        }
    };
    debug_assert!(clause_in_class(&c, class), "{c} sampled for {class}");
    Atom::Clause(c)
}

/// A graph with `vertices` vertices spread over `parts` nonempty parts and
/// each cross-part pair joined with probability `edge_prob`.
pub fn random_graph(vertices: usize, parts: usize, edge_prob: f64, seed: u64) -> Result<PartitionedGraph> {
    if parts == 0 || parts > vertices {
        return Err(Error::Param(format!("{parts} parts for {vertices} vertices")));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::Param(format!("probability {edge_prob} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ps: Vec<Vec<u32>> = (0..parts).map(|i| vec![i as u32 + 1]).collect();
    for v in parts + 1..=vertices {
        ps[rng.gen_range(0..parts)].push(v as u32);
    }
    let part_of: BTreeMap<u32, usize> = ps
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.iter().map(move |&v| (v, i)))
        .collect();
    let mut edges = Vec::new();
    for a in 1..=vertices as u32 {
        for b in a + 1..=vertices as u32 {
            if part_of[&a] != part_of[&b] && rng.gen_bool(edge_prob) {
                edges.push((a, b));
            }
        }
    }
    PartitionedGraph::new(ps, edges)
}
