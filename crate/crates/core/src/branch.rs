//! Branching solver for formulas whose tractable part is 2-CNF.
//!
//! At each node the outermost variable is propagated both ways through the
//! 2-CNF part. The search only splits when both values are viable and both
//! touch a backdoor variable, so every split shrinks the backdoor and the
//! search tree has at most `2^k` leaves.

use std::collections::BTreeSet;

use crate::backdoor::{clause_in_class, BaseClass};
use crate::error::{Error, Result};
use crate::formula::{apply_assignment, eval_matrix, Assignment, Atom, Clause, QbfFormula, Quantifier, Var};
use crate::stats::SolveStats;
use crate::twocnf::{eval_q2cnf, look_ahead, prop, Status};

/// Which argument justified a [`StepDecision`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// Neither value leaves a true 2-CNF part.
    BothFalse,
    /// Exactly one value leaves a true 2-CNF part.
    OneTrue,
    /// Both values are viable and one of them avoids the backdoor.
    Disjoint,
    Branch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Reject,
    Follow(Assignment),
    Branch(Assignment, Assignment),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepDecision {
    pub decision: Decision,
    pub case: Case,
}

fn tractable_clauses(formula: &QbfFormula) -> Result<Vec<&Clause>> {
    formula
        .matrix
        .tractable
        .iter()
        .map(|a| match a {
            Atom::Clause(c) if c.len() <= 2 => Ok(c),
            Atom::Clause(c) => Err(Error::Arity(c.len())),
            Atom::Equation(_) => Err(Error::Class("equation in a 2-CNF part".into())),
        })
        .collect()
}

/// Decides how to proceed on the outermost variable.
///
/// The 2-CNF part must not be contradictory, the prefix must be nonempty
/// and no backdoor clause may be empty; otherwise [`Error::State`].
pub fn step(formula: &QbfFormula) -> Result<StepDecision> {
    let phi1 = tractable_clauses(formula)?;
    let closed = prop(phi1.iter().copied())?;
    if closed.is_contradiction() {
        return Err(Error::State("contradictory 2-CNF part".into()));
    }
    if formula.matrix.backdoor.iter().any(Clause::is_empty) {
        return Err(Error::State("empty backdoor clause".into()));
    }
    let Some((x, q)) = formula.prefix.outermost() else {
        return Err(Error::State("empty prefix".into()));
    };
    let la = look_ahead(&closed, x, &formula.prefix)?;
    let backdoor = formula.matrix.backdoor_vars();

    let mut viable = [false; 2];
    for (side, ok) in la.sides.iter().zip(viable.iter_mut()) {
        if side.status == Status::Contradiction {
            continue;
        }
        let u = &side.assignment;
        let prefix = formula.prefix.without(|v| u.contains(v));
        let rest: Vec<Clause> = phi1.iter().filter_map(|c| restrict(c, u)).collect();
        *ok = !rest.iter().any(Clause::is_empty) && eval_q2cnf(&prefix, &rest)?;
    }
    let take = |b: usize| la.sides[b].assignment.clone();
    let exists = q == Quantifier::Exists;
    let (decision, case) = match viable {
        [false, false] => (Decision::Reject, Case::BothFalse),
        [a, b] if a != b => {
            let good = usize::from(b);
            let d = if exists {
                Decision::Follow(take(good))
            } else {
                Decision::Reject
            };
            (d, Case::OneTrue)
        }
        _ => {
            let disjoint = |b: usize| la.sides[b].domain().is_disjoint(&backdoor);
            // Ties go to 1 so that runs are reproducible.
            match [1, 0].into_iter().find(|&b| disjoint(b)) {
                Some(b) => {
                    let pick = if exists { b } else { 1 - b };
                    (Decision::Follow(take(pick)), Case::Disjoint)
                }
                None => (Decision::Branch(take(0), take(1)), Case::Branch),
            }
        }
    };
    Ok(StepDecision { decision, case })
}

fn restrict(c: &Clause, u: &Assignment) -> Option<Clause> {
    let mut kept = Vec::with_capacity(c.len());
    for &l in c.lits() {
        match u.get(l.var()) {
            Some(v) if l.eval(v) => return None,
            Some(_) => {}
            None => kept.push(l),
        }
    }
    Some(Clause::new(kept).expect("subset of a clause"))
}

/// Solves a formula whose tractable part is 2-CNF.
///
/// Fails with [`Error::Class`] if the declared class is not
/// [`BaseClass::TwoCnf`] or a tractable atom is not a clause of at most
/// two literals.
pub fn solve(formula: &QbfFormula) -> Result<(bool, SolveStats)> {
    if formula.base_class.is_some_and(|c| c != BaseClass::TwoCnf) {
        return Err(Error::Class(format!(
            "2-CNF solver given a formula declared {}",
            formula.base_class.expect("checked")
        )));
    }
    if formula
        .matrix
        .tractable
        .iter()
        .any(|a| a.as_clause().is_none_or(|c| !clause_in_class(c, BaseClass::TwoCnf)))
    {
        return Err(Error::Class("tractable part is not 2-CNF".into()));
    }
    if let Some(v) = formula.matrix.vars().into_iter().find(|&v| !formula.prefix.contains(v)) {
        return Err(Error::Domain(v));
    }
    let mut stats = SolveStats::with_k(formula.k());
    let value = node(formula.clone(), 0, &mut stats)?;
    debug_assert!(stats.within_budget(), "{stats:?}");
    Ok((value, stats))
}

fn node(mut formula: QbfFormula, depth: u64, stats: &mut SolveStats) -> Result<bool> {
    // Propagate the 2-CNF part and apply what it forces. A forced universal
    // literal makes the matrix unwinnable.
    loop {
        if formula.matrix.has_falsified_atom() {
            stats.leaf(depth);
            return Ok(false);
        }
        let closed = prop(tractable_clauses(&formula)?)?;
        if closed.is_contradiction() {
            stats.leaf(depth);
            return Ok(false);
        }
        let mut forced = Assignment::new();
        for l in closed.units() {
            if formula.prefix.is_universal(l.var()) {
                stats.leaf(depth);
                return Ok(false);
            }
            forced.insert(l.var(), l.is_positive());
        }
        if forced.is_empty() {
            break;
        }
        formula = apply_assignment(&formula, &forced)?;
    }
    if formula.matrix.backdoor.is_empty() {
        stats.leaf(depth);
        let phi1 = tractable_clauses(&formula)?;
        return eval_q2cnf(&formula.prefix, phi1);
    }
    if formula.prefix.is_empty() {
        stats.leaf(depth);
        return eval_matrix(&formula.matrix, &Assignment::new());
    }
    let exists = formula.prefix.outermost().map(|e| e.1) == Some(Quantifier::Exists);
    match step(&formula)?.decision {
        Decision::Reject => {
            stats.leaf(depth);
            Ok(false)
        }
        Decision::Follow(u) => node(apply_assignment(&formula, &u)?, depth + 1, stats),
        Decision::Branch(u0, u1) => {
            stats.branch_nodes += 1;
            let before = shrinking(&formula);
            for u in [u0, u1] {
                let arm = apply_assignment(&formula, &u)?;
                debug_assert!(shrinking(&arm).len() < before.len());
                let value = node(arm, depth + 1, stats)?;
                if value == exists {
                    return Ok(value);
                }
            }
            Ok(!exists)
        }
    }
}

fn shrinking(formula: &QbfFormula) -> BTreeSet<Var> {
    formula.matrix.backdoor_vars()
}
