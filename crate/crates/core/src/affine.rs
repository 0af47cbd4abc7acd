//! GF(2) systems under a quantifier prefix: pivoting, elimination of
//! innermost existential variables, kernelization against a backdoor set
//! and the resulting backdoor solver.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::formula::{Atom, Clause, Equation, Prefix, QbfFormula, Quantifier, Var};
use crate::stats::SolveStats;

/// Equations over variables of a prefix. Trivially true rows are dropped
/// and duplicate rows kept once; a `({}, 1)` row is kept as a contradiction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffSystem {
    equations: Vec<Equation>,
    prefix: Prefix,
}

impl AffSystem {
    /// Fails with [`Error::Domain`] if an equation mentions a variable
    /// outside `prefix`.
    pub fn new(equations: Vec<Equation>, prefix: Prefix) -> Result<AffSystem> {
        if let Some(&v) = equations.iter().flat_map(|e| e.vars()).find(|&&v| !prefix.contains(v)) {
            return Err(Error::Domain(v));
        }
        let mut sys = AffSystem { equations, prefix };
        sys.normalize();
        Ok(sys)
    }

    fn normalize(&mut self) {
        let mut seen = BTreeSet::new();
        self.equations.retain(|e| !e.is_trivial() && seen.insert(e.clone()));
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.equations.iter().flat_map(|e| e.vars().iter().copied()).collect()
    }

    pub fn innermost(&self, i: usize) -> Option<Var> {
        self.prefix.innermost_of(self.equations.get(i)?.vars().iter().copied())
    }

    fn check_holder(&self, x: Var, i: usize) -> Result<()> {
        let e = self.equations.get(i).ok_or(Error::Index(i))?;
        if !e.contains(x) {
            return Err(Error::MissingVar(x));
        }
        Ok(())
    }

    /// Adds row `i` to every other row containing `x`, leaving `x` in row
    /// `i` only. The solution set is unchanged.
    pub fn pivot(&self, x: Var, i: usize) -> Result<AffSystem> {
        self.check_holder(x, i)?;
        let row = self.equations[i].clone();
        let equations = self
            .equations
            .iter()
            .enumerate()
            .map(|(j, e)| {
                if j != i && e.contains(x) {
                    e.add(&row)
                } else {
                    e.clone()
                }
            })
            .collect();
        let mut out = AffSystem {
            equations,
            prefix: self.prefix.clone(),
        };
        out.normalize();
        Ok(out)
    }

    /// Pivots on `x` and drops row `i` together with `x`.
    ///
    /// `x` must be existential and the innermost variable of row `i`.
    pub fn elim(&self, x: Var, i: usize) -> Result<AffSystem> {
        self.check_holder(x, i)?;
        match self.prefix.quantifier(x) {
            Some(Quantifier::Exists) => {}
            Some(Quantifier::Forall) => return Err(Error::Quantifier(x)),
            None => return Err(Error::Domain(x)),
        }
        if self.innermost(i) != Some(x) {
            return Err(Error::Innermost(x));
        }
        let mut out = self.pivot(x, i)?;
        out.equations.retain(|e| !e.contains(x));
        out.prefix = out.prefix.without(|v| v == x);
        Ok(out)
    }
}

/// Truth value of `Q . sys` by repeatedly eliminating innermost variables.
pub fn eval_qaff(sys: &AffSystem) -> bool {
    let mut sys = sys.clone();
    loop {
        if sys.equations.iter().any(Equation::is_contradiction) {
            return false;
        }
        let Some(x) = sys.innermost(0) else {
            return true;
        };
        if sys.prefix.is_universal(x) {
            return false;
        }
        sys = sys.elim(x, 0).expect("innermost existential of row 0");
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelResult {
    /// The input prefix restricted to the kernel's variables and the
    /// backdoor set.
    pub prefix: Prefix,
    pub system: AffSystem,
    /// Per equation, its innermost variable. Once every other variable of
    /// the equation is set, the value of this one is determined.
    pub forced: Vec<(Var, Equation)>,
}

impl KernelResult {
    /// Checks the size bounds against the backdoor set `x`.
    pub fn check_bounds(&self, x: &BTreeSet<Var>) -> Result<()> {
        let k = x.len();
        let eqs = self.system.equations();
        if eqs.len() > k {
            return Err(Error::Internal(format!("kernel has {} equations for k={k}", eqs.len())));
        }
        let mut vars = self.system.vars();
        vars.extend(x.iter().copied());
        if vars.len() > 2 * k {
            return Err(Error::Internal(format!(
                "kernel has {} variables for k={k}",
                vars.len()
            )));
        }
        if let Some(e) = eqs
            .iter()
            .find(|e| e.vars().iter().filter(|v| !x.contains(v)).count() > 1)
        {
            return Err(Error::Internal(format!(
                "{e} keeps more than one non-backdoor variable"
            )));
        }
        let inner: BTreeSet<Var> = self.forced.iter().map(|f| f.0).collect();
        if inner.len() != eqs.len() {
            return Err(Error::Internal("innermost variables are not distinct".into()));
        }
        Ok(())
    }
}

/// Shrinks `sys` to at most `|x|` equations over at most `2|x|` variables
/// such that `Q.(sys ∧ φ2)` keeps its value for every CNF `φ2` over `x`.
///
/// The caller must have checked that `sys` alone is true; meeting a
/// universal innermost variable or a contradiction fails with
/// [`Error::Precondition`].
pub fn kernelize(sys: &AffSystem, x: &BTreeSet<Var>) -> Result<KernelResult> {
    let mut sys = sys.clone();
    let check = |sys: &AffSystem, i: usize| -> Result<Var> {
        if sys.equations[i].is_contradiction() {
            return Err(Error::Precondition("system is unsatisfiable".into()));
        }
        let v = sys.innermost(i).expect("nonempty row");
        if sys.prefix.is_universal(v) {
            return Err(Error::Precondition(format!(
                "universal {v} is innermost in {}",
                sys.equations[i]
            )));
        }
        Ok(v)
    };

    // Eliminate innermost variables outside `x` and make innermost
    // variables distinct, until neither applies.
    'fixpoint: loop {
        let mut holder: BTreeMap<Var, usize> = BTreeMap::new();
        for i in 0..sys.len() {
            let v = check(&sys, i)?;
            if !x.contains(&v) {
                sys = sys.elim(v, i)?;
                continue 'fixpoint;
            }
            if let Some(&first) = holder.get(&v) {
                sys = sys.pivot(v, first)?;
                continue 'fixpoint;
            }
            holder.insert(v, i);
        }
        break;
    }

    // Rows in order of their innermost variable, outermost first. Each row
    // keeps only its innermost non-backdoor variable y; y is first made
    // private, which only touches rows further down. Dropping the other
    // non-backdoor variables z of the row is a change of variable
    // y ↦ y ⊕ z, valid because y is quantified after every z and occurs
    // nowhere else.
    let pos = |sys: &AffSystem, i: usize| sys.prefix.position(sys.innermost(i).expect("nonempty row"));
    let mut order: Vec<usize> = (0..sys.len()).collect();
    order.sort_by_key(|&i| pos(&sys, i));
    let rows: Vec<Equation> = order.iter().map(|&i| sys.equations[i].clone()).collect();
    sys.equations = rows;
    for i in 0..sys.len() {
        let outside: Vec<Var> = sys.equations[i]
            .vars()
            .iter()
            .copied()
            .filter(|v| !x.contains(v))
            .collect();
        let Some(y) = sys.prefix.innermost_of(outside.iter().copied()) else {
            continue;
        };
        let row = sys.equations[i].clone();
        for j in i + 1..sys.len() {
            if sys.equations[j].contains(y) {
                sys.equations[j] = sys.equations[j].add(&row);
            }
        }
        let drop: BTreeSet<Var> = outside.into_iter().filter(|&v| v != y).collect();
        sys.equations[i] = row.without(&drop);
    }
    if sys.equations.iter().any(|e| e.is_trivial() || e.is_contradiction()) {
        return Err(Error::Internal("kernel row degenerated".into()));
    }

    let forced = (0..sys.len())
        .map(|i| check(&sys, i).map(|v| (v, sys.equations[i].clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut keep = sys.vars();
    keep.extend(x.iter().copied());
    let prefix = sys.prefix.restricted_to(&keep);
    let system = AffSystem::new(sys.equations, prefix.clone())?;
    let result = KernelResult { prefix, system, forced };
    result.check_bounds(x)?;
    Ok(result)
}

/// Splits a formula into its equation system and backdoor clauses.
fn split(formula: &QbfFormula) -> Result<(AffSystem, &[Clause])> {
    if formula.base_class.is_some_and(|c| c != crate::BaseClass::Aff) {
        return Err(Error::Class(format!(
            "affine solver given a formula declared {}",
            formula.base_class.expect("checked")
        )));
    }
    let equations = formula
        .matrix
        .tractable
        .iter()
        .map(|a| match a {
            Atom::Equation(e) => Ok(e.clone()),
            Atom::Clause(_) => Err(Error::Class("clause in an affine part".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(v) = formula
        .matrix
        .backdoor_vars()
        .into_iter()
        .find(|&v| !formula.prefix.contains(v))
    {
        return Err(Error::Domain(v));
    }
    Ok((
        AffSystem::new(equations, formula.prefix.clone())?,
        &formula.matrix.backdoor,
    ))
}

/// Kernel of the equation part of `formula` against its backdoor
/// variables, as a formula of the same shape.
pub fn kernelize_formula(formula: &QbfFormula) -> Result<QbfFormula> {
    let (sys, backdoor) = split(formula)?;
    let x = formula.matrix.backdoor_vars();
    if !eval_qaff(&sys) {
        let falsum = Equation::new([], true);
        return Ok(QbfFormula::new(
            Prefix::default(),
            crate::formula::Matrix::new(vec![falsum.into()], vec![]),
            Some(crate::BaseClass::Aff),
        ));
    }
    let kernel = kernelize(&sys, &x)?;
    Ok(QbfFormula::new(
        kernel.prefix,
        crate::formula::Matrix::new(
            kernel.system.equations.into_iter().map(Atom::Equation).collect(),
            backdoor.to_vec(),
        ),
        Some(crate::BaseClass::Aff),
    ))
}

/// Solves a formula whose tractable part is a system of equations.
///
/// Branches only on kernel variables whose value is not determined by an
/// equation, at most `k` of them.
pub fn solve_aff(formula: &QbfFormula) -> Result<(bool, SolveStats)> {
    let (sys, backdoor) = split(formula)?;
    let x = formula.matrix.backdoor_vars();
    let mut stats = SolveStats::with_k(x.len());
    if !eval_qaff(&sys) {
        stats.leaf(0);
        return Ok((false, stats));
    }
    let kernel = kernelize(&sys, &x)?;
    let forced: BTreeMap<Var, &Equation> = kernel.forced.iter().map(|(v, e)| (*v, e)).collect();
    let search = Search {
        order: kernel.prefix.iter().collect(),
        forced,
        equations: kernel.system.equations(),
        backdoor,
    };
    let mut values = BTreeMap::new();
    let value = search.run(0, &mut values, &mut stats);
    debug_assert!(stats.within_budget(), "{stats:?}");
    Ok((value, stats))
}

struct Search<'a> {
    order: Vec<(Var, Quantifier)>,
    forced: BTreeMap<Var, &'a Equation>,
    equations: &'a [Equation],
    backdoor: &'a [Clause],
}

impl Search<'_> {
    fn run(&self, depth: usize, values: &mut BTreeMap<Var, bool>, stats: &mut SolveStats) -> bool {
        let Some(&(v, q)) = self.order.get(depth) else {
            stats.leaf(depth as u64);
            let value = |v: Var| values[&v];
            return self.equations.iter().all(|e| e.eval(value))
                && self
                    .backdoor
                    .iter()
                    .all(|c| c.lits().iter().any(|l| l.eval(value(l.var()))));
        };
        if let Some(e) = self.forced.get(&v) {
            let rest = e
                .vars()
                .iter()
                .filter(|&&w| w != v)
                .fold(false, |acc, w| acc ^ values[w]);
            values.insert(v, rest ^ e.rhs());
            return self.run(depth + 1, values, stats);
        }
        let exists = q == Quantifier::Exists;
        stats.branch_nodes += 1;
        for b in [false, true] {
            values.insert(v, b);
            if self.run(depth + 1, values, stats) == exists {
                return exists;
            }
        }
        !exists
    }
}
