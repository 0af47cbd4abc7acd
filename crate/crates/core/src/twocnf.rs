//! Resolution closure of 2-CNF clause sets, the unit look-ahead used by the
//! branching solver, and quantified 2-CNF evaluation.
//!
//! Closure is computed on the implication graph: a clause `(a ∨ b)` is
//! derivable iff `¬a` reaches `b`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::formula::{Assignment, Clause, Lit, Prefix, Quantifier, Var};

/// A clause set closed under resolution with subsumed clauses removed, or
/// the contradiction marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop2Cnf {
    contradiction: bool,
    clauses: BTreeSet<Clause>,
}

impl Prop2Cnf {
    pub fn contradiction() -> Prop2Cnf {
        Prop2Cnf {
            contradiction: true,
            clauses: BTreeSet::from([Clause::empty()]),
        }
    }

    pub fn is_contradiction(&self) -> bool {
        self.contradiction
    }

    /// The closed clause set. For the contradiction marker this is `{⊥}`.
    pub fn clauses(&self) -> &BTreeSet<Clause> {
        &self.clauses
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    /// Literals forced by the closure, one per unit clause.
    pub fn units(&self) -> impl Iterator<Item = Lit> + '_ {
        self.clauses.iter().filter(|c| c.len() == 1).map(|c| c.lits()[0])
    }
}

/// Dense bitset rows over literal nodes.
struct Reach {
    words: usize,
    rows: Vec<u64>,
}

impl Reach {
    fn new(nodes: usize) -> Reach {
        let words = nodes.div_ceil(64).max(1);
        Reach {
            words,
            rows: vec![0; nodes * words],
        }
    }

    fn set(&mut self, from: usize, to: usize) {
        self.rows[from * self.words + to / 64] |= 1 << (to % 64);
    }

    fn get(&self, from: usize, to: usize) -> bool {
        self.rows[from * self.words + to / 64] >> (to % 64) & 1 == 1
    }

    /// Warshall's algorithm on bit rows.
    fn close(&mut self, nodes: usize) {
        let w = self.words;
        for k in 0..nodes {
            let (kw, kb) = (k / 64, k % 64);
            for i in 0..nodes {
                if i != k && self.rows[i * w + kw] >> kb & 1 == 1 {
                    for j in 0..w {
                        let bits = self.rows[k * w + j];
                        self.rows[i * w + j] |= bits;
                    }
                }
            }
        }
    }
}

/// Computes `Prop(φ)`.
///
/// Fails with [`Error::Arity`] on a clause with more than two literals.
pub fn prop<'a, I>(clauses: I) -> Result<Prop2Cnf>
where
    I: IntoIterator<Item = &'a Clause>,
{
    let clauses: Vec<&Clause> = clauses.into_iter().collect();
    if let Some(c) = clauses.iter().find(|c| c.len() > 2) {
        return Err(Error::Arity(c.len()));
    }
    if clauses.iter().any(|c| c.is_empty()) {
        return Ok(Prop2Cnf::contradiction());
    }
    let vars: Vec<Var> = clauses
        .iter()
        .flat_map(|c| c.vars())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<Var, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let node = |l: Lit| 2 * index[&l.var()] + usize::from(l.is_positive());
    let lit_of = |n: usize| vars[n / 2].lit(n % 2 == 1);
    let nodes = 2 * vars.len();

    let mut reach = Reach::new(nodes);
    for c in &clauses {
        match c.lits() {
            [a] => reach.set(node(!*a), node(*a)),
            [a, b] => {
                reach.set(node(!*a), node(*b));
                reach.set(node(!*b), node(*a));
            }
            _ => unreachable!("arity checked above"),
        }
    }
    reach.close(nodes);

    let forced = |n: usize| reach.get(n ^ 1, n);
    if (0..vars.len()).any(|i| forced(2 * i) && forced(2 * i + 1)) {
        return Ok(Prop2Cnf::contradiction());
    }
    let mut out = BTreeSet::new();
    for n in 0..nodes {
        if forced(n) {
            out.insert(Clause::new([lit_of(n)]).expect("unit"));
        }
    }
    // (a ∨ b) for distinct variables, neither literal forced.
    for a in 0..nodes {
        if forced(a) {
            continue;
        }
        for b in (a / 2 + 1) * 2..nodes {
            if !forced(b) && reach.get(a ^ 1, b) {
                out.insert(Clause::new([lit_of(a), lit_of(b)]).expect("distinct variables"));
            }
        }
    }
    Ok(Prop2Cnf {
        contradiction: false,
        clauses: out,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Consistent,
    Contradiction,
}

/// Effect of fixing the pivot to one value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Side {
    pub status: Status,
    /// Unit clauses that appear in the closure after adding the pivot unit.
    pub units: BTreeMap<Var, bool>,
    /// The existential part of `units` plus the pivot binding.
    pub assignment: Assignment,
}

impl Side {
    /// Variables bound by [`Side::assignment`].
    pub fn domain(&self) -> BTreeSet<Var> {
        self.assignment.domain()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LookAhead {
    pub pivot: Var,
    /// Indexed by the pivot value.
    pub sides: [Side; 2],
}

/// Propagates both values of `x` through `phi1`.
///
/// `phi1` must be a closure that is not the contradiction marker, otherwise
/// this fails with [`Error::State`].
pub fn look_ahead(phi1: &Prop2Cnf, x: Var, prefix: &Prefix) -> Result<LookAhead> {
    if phi1.is_contradiction() {
        return Err(Error::State("look-ahead on a contradictory closure".into()));
    }
    if !prefix.contains(x) {
        return Err(Error::Domain(x));
    }
    let side = |b: bool| -> Result<Side> {
        let unit = Clause::new([x.lit(b)]).expect("unit");
        let closed = prop(phi1.clauses().iter().chain(std::iter::once(&unit)))?;
        let mut assignment: Assignment = [(x, b)].into_iter().collect();
        if closed.is_contradiction() {
            return Ok(Side {
                status: Status::Contradiction,
                units: BTreeMap::new(),
                assignment,
            });
        }
        let mut units = BTreeMap::new();
        for c in closed.clauses().difference(phi1.clauses()) {
            let [l] = c.lits() else {
                return Err(Error::Internal(format!(
                    "look-ahead on {x}={} derived the non-unit clause {c}",
                    u8::from(b)
                )));
            };
            units.insert(l.var(), l.is_positive());
            if prefix.is_existential(l.var()) {
                assignment.insert(l.var(), l.is_positive());
            }
        }
        Ok(Side {
            status: Status::Consistent,
            units,
            assignment,
        })
    };
    Ok(LookAhead {
        pivot: x,
        sides: [side(false)?, side(true)?],
    })
}

/// Decides `prefix . phi` for a 2-CNF matrix in polynomial time.
///
/// The formula is false iff its closure is contradictory, contains a unit
/// on a universal variable, contains a clause over two universal variables,
/// or makes an existential variable equivalent to a literal of a universal
/// variable quantified inside it.
pub fn eval_q2cnf<'a, I>(prefix: &Prefix, phi: I) -> Result<bool>
where
    I: IntoIterator<Item = &'a Clause>,
{
    let phi: Vec<&Clause> = phi.into_iter().collect();
    if let Some(v) = phi.iter().flat_map(|c| c.vars()).find(|&v| !prefix.contains(v)) {
        return Err(Error::Domain(v));
    }
    let closed = prop(phi)?;
    if closed.is_contradiction() {
        return Ok(false);
    }
    let forall = |v: Var| prefix.quantifier(v) == Some(Quantifier::Forall);
    for c in closed.clauses() {
        match c.lits() {
            [l] if forall(l.var()) => return Ok(false),
            [a, b] if forall(a.var()) && forall(b.var()) => return Ok(false),
            [a, b] => {
                // (a ∨ b) together with (¬a ∨ ¬b) states a ≡ ¬b.
                let (e, u) = if forall(b.var()) { (*a, *b) } else { (*b, *a) };
                if forall(u.var())
                    && prefix.position(e.var()) < prefix.position(u.var())
                    && closed
                        .clauses()
                        .contains(&Clause::new([!*a, !*b]).expect("distinct variables"))
                {
                    return Ok(false);
                }
            }
            _ => {}
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::backdoor_example;
    use crate::formula::{Matrix, QbfFormula};
    use crate::oracle::eval_bruteforce;

    fn cl(lits: &[i64]) -> Clause {
        Clause::from_dimacs(lits).unwrap()
    }

    fn set(cs: &[&[i64]]) -> BTreeSet<Clause> {
        cs.iter().map(|c| cl(c)).collect()
    }

    fn prefix(spec: &[(u32, Quantifier)]) -> Prefix {
        Prefix::new(spec.iter().map(|&(i, q)| (Var::new(i), q))).unwrap()
    }

    use Quantifier::{Exists as E, Forall as A};

    #[test]
    fn chain_adds_resolvent() {
        let p = prop(&set(&[&[-1, 2], &[-2, 3]])).unwrap();
        assert_eq!(p.clauses(), &set(&[&[-1, 2], &[-2, 3], &[-1, 3]]));
    }

    #[test]
    fn complementary_units_contradict() {
        assert!(prop(&set(&[&[1], &[-1]])).unwrap().is_contradiction());
    }

    #[test]
    fn closed_set_unchanged() {
        let s = set(&[&[1, 2]]);
        assert_eq!(prop(&s).unwrap().clauses(), &s);
    }

    #[test]
    fn units_subsume() {
        let p = prop(&set(&[&[1, 2], &[1, -2]])).unwrap();
        assert_eq!(p.clauses(), &set(&[&[1]]));
    }

    #[test]
    fn wide_clause_is_rejected() {
        assert_eq!(prop(&set(&[&[1, 2, 3]])), Err(Error::Arity(3)));
    }

    fn example_phi1() -> Prop2Cnf {
        let f = backdoor_example();
        let cs: Vec<Clause> = f
            .matrix
            .tractable
            .iter()
            .map(|a| a.as_clause().unwrap().clone())
            .collect();
        prop(&cs).unwrap()
    }

    #[test]
    fn example_look_ahead() {
        let f = backdoor_example();
        let la = look_ahead(&example_phi1(), Var::new(1), &f.prefix).unwrap();
        let dom = |b: usize| la.sides[b].domain().into_iter().map(Var::id).collect::<Vec<_>>();
        assert_eq!(dom(0), vec![1, 3]);
        assert_eq!(la.sides[0].assignment.get(Var::new(3)), Some(true));
        assert_eq!(dom(1), vec![1, 4]);
    }

    #[test]
    fn look_ahead_contradiction() {
        let p = prop(&set(&[&[1], &[-1, 2]])).unwrap();
        let la = look_ahead(&p, Var::new(1), &prefix(&[(1, E), (2, E)])).unwrap();
        assert_eq!(la.sides[0].status, Status::Contradiction);
        assert_eq!(la.sides[1].status, Status::Consistent);
    }

    #[test]
    fn look_ahead_needs_consistent_closure() {
        let err = look_ahead(&Prop2Cnf::contradiction(), Var::new(1), &prefix(&[(1, E)]));
        assert!(matches!(err, Err(Error::State(_))));
    }

    #[test]
    fn quantified_examples() {
        assert!(!eval_q2cnf(&prefix(&[(1, A), (2, A)]), &set(&[&[1, 2]])).unwrap());
        assert!(!eval_q2cnf(&prefix(&[(1, E), (2, A)]), &set(&[&[-1, 2], &[1, -2]])).unwrap());
        assert!(eval_q2cnf(&prefix(&[(1, E), (2, A)]), &set(&[&[-2, 1]])).unwrap());
        // The same equivalence with the universal outside is winnable.
        assert!(eval_q2cnf(&prefix(&[(2, A), (1, E)]), &set(&[&[-1, 2], &[1, -2]])).unwrap());
    }

    #[test]
    fn unquantified_variable() {
        assert_eq!(
            eval_q2cnf(&prefix(&[(1, E)]), &set(&[&[1, 2]])),
            Err(Error::Domain(Var::new(2)))
        );
    }

    #[test]
    fn agrees_with_oracle_on_small_random_formulas() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let n = rng.gen_range(1..=6u32);
            let p = Prefix::new((1..=n).map(|i| (Var::new(i), if rng.gen_bool(0.4) { A } else { E }))).unwrap();
            let m = rng.gen_range(0..=2 * n as usize);
            let mut cs = BTreeSet::new();
            for _ in 0..m {
                let a = rng.gen_range(1..=n as i64) * if rng.gen() { 1 } else { -1 };
                let b = rng.gen_range(1..=n as i64) * if rng.gen() { 1 } else { -1 };
                if let Ok(c) = Clause::from_dimacs(&if rng.gen_bool(0.2) { vec![a] } else { vec![a, b] }) {
                    cs.insert(c);
                }
            }
            let f = QbfFormula::new(
                p.clone(),
                Matrix::new(cs.iter().cloned().map(Into::into).collect(), vec![]),
                None,
            );
            assert_eq!(eval_q2cnf(&p, &cs).unwrap(), eval_bruteforce(&f).unwrap(), "{f}");
        }
    }
}
