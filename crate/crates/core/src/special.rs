//! The backdoor solver for positive clauses with negative units, its dual,
//! and the dispatcher that picks a solver for an arbitrary formula.

use std::fmt;
use std::str::FromStr;

use crate::backdoor::{clause_in_class, partition, rank_classes, BaseClass};
use crate::error::{Error, Result};
use crate::formula::{apply_assignment, Assignment, Atom, QbfFormula, Quantifier};
use crate::oracle::{eval_bruteforce_stats, DEFAULT_CAP};
use crate::reductions::dualize;
use crate::stats::SolveStats;
use crate::{affine, branch};

fn clauses_in(formula: &QbfFormula, cls: BaseClass) -> Result<()> {
    if formula.base_class.is_some_and(|c| c != cls) {
        return Err(Error::Class(format!(
            "{cls} solver given a formula declared {}",
            formula.base_class.expect("checked")
        )));
    }
    match formula
        .matrix
        .tractable
        .iter()
        .find(|a| a.as_clause().is_none_or(|c| !clause_in_class(c, cls)))
    {
        Some(a) => Err(Error::Class(format!("{a} is not in {cls}"))),
        None => Ok(()),
    }
}

/// Solves a formula whose tractable part has only positive clauses and
/// negative units.
///
/// Units are settled first; then variables outside the backdoor are set
/// greedily (existential to 1, universal to 0) and the remaining backdoor
/// game is searched exhaustively.
pub fn solve_posneg(formula: &QbfFormula) -> Result<(bool, SolveStats)> {
    clauses_in(formula, BaseClass::PosAndNegUnits)?;
    if let Some(v) = formula.matrix.vars().into_iter().find(|&v| !formula.prefix.contains(v)) {
        return Err(Error::Domain(v));
    }
    let mut stats = SolveStats::with_k(formula.k());
    let mut f = formula.clone();
    loop {
        if f.matrix.has_falsified_atom() {
            stats.leaf(0);
            return Ok((false, stats));
        }
        let unit = f
            .matrix
            .atoms()
            .filter_map(|a| a.as_clause().filter(|c| c.len() == 1).map(|c| c.lits()[0]))
            .next();
        let Some(l) = unit else { break };
        if f.prefix.is_universal(l.var()) {
            stats.leaf(0);
            return Ok((false, stats));
        }
        f = apply_assignment(&f, &[(l.var(), l.is_positive())].into_iter().collect())?;
    }

    let backdoor = f.matrix.backdoor_vars();
    let greedy: Assignment = f
        .prefix
        .iter()
        .filter(|(v, _)| !backdoor.contains(v))
        .map(|(v, q)| (v, q == Quantifier::Exists))
        .collect();
    let residual = apply_assignment(&f, &greedy)?;
    debug_assert!(residual.prefix.vars().all(|v| backdoor.contains(&v)));
    let (value, inner) = eval_bruteforce_stats(&residual, 63)?;
    stats.leaves += inner.leaves;
    stats.max_depth = inner.max_depth;
    debug_assert!(stats.within_budget(), "{stats:?}");
    Ok((value, stats))
}

/// Solves a formula whose tractable part has only negative clauses and
/// positive units, by solving its dual.
pub fn solve_dual_posneg(formula: &QbfFormula) -> Result<(bool, SolveStats)> {
    clauses_in(formula, BaseClass::NegAndPosUnits)?;
    solve_posneg(&dualize(formula))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    TwoCnfBackdoor,
    AffBackdoor,
    PosNegUnit,
    DualPosNegUnit,
    BruteForce,
}

impl Algorithm {
    /// Base class the solver expects, if any.
    pub fn class(self) -> Option<BaseClass> {
        match self {
            Algorithm::TwoCnfBackdoor => Some(BaseClass::TwoCnf),
            Algorithm::AffBackdoor => Some(BaseClass::Aff),
            Algorithm::PosNegUnit => Some(BaseClass::PosAndNegUnits),
            Algorithm::DualPosNegUnit => Some(BaseClass::NegAndPosUnits),
            Algorithm::BruteForce => None,
        }
    }

    pub fn for_class(cls: BaseClass) -> Option<Algorithm> {
        [
            Algorithm::TwoCnfBackdoor,
            Algorithm::AffBackdoor,
            Algorithm::PosNegUnit,
            Algorithm::DualPosNegUnit,
        ]
        .into_iter()
        .find(|a| a.class() == Some(cls))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::TwoCnfBackdoor => "2cnf",
            Algorithm::AffBackdoor => "aff",
            Algorithm::PosNegUnit => "posneg",
            Algorithm::DualPosNegUnit => "dual-posneg",
            Algorithm::BruteForce => "brute",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algorithm> {
        Ok(match s {
            "2cnf" => Algorithm::TwoCnfBackdoor,
            "aff" => Algorithm::AffBackdoor,
            "posneg" => Algorithm::PosNegUnit,
            "dual-posneg" => Algorithm::DualPosNegUnit,
            "brute" => Algorithm::BruteForce,
            _ => return Err(Error::UnknownTag(s.to_string())),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DispatchConfig {
    /// Largest prefix the exhaustive evaluator accepts.
    pub brute_cap: usize,
    /// Run the best backdoor solver when nothing else fits, instead of
    /// failing.
    pub fallback: bool,
}

impl Default for DispatchConfig {
    fn default() -> DispatchConfig {
        DispatchConfig {
            brute_cap: DEFAULT_CAP,
            fallback: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub value: bool,
    pub algorithm: Algorithm,
    pub stats: SolveStats,
    /// Class the matrix was split against; `None` for brute force.
    pub class: Option<BaseClass>,
    /// Backdoor size for `class`, or the number of variables for brute
    /// force.
    pub k: usize,
    pub note: Option<String>,
}

/// Runs one solver on a formula already split against its class.
pub fn run(formula: &QbfFormula, algorithm: Algorithm, cfg: &DispatchConfig) -> Result<(bool, SolveStats)> {
    match algorithm {
        Algorithm::TwoCnfBackdoor => branch::solve(formula),
        Algorithm::AffBackdoor => affine::solve_aff(formula),
        Algorithm::PosNegUnit => solve_posneg(formula),
        Algorithm::DualPosNegUnit => solve_dual_posneg(formula),
        Algorithm::BruteForce => eval_bruteforce_stats(formula, cfg.brute_cap),
    }
}

fn prepared(formula: &QbfFormula, cls: BaseClass) -> Result<QbfFormula> {
    match formula.base_class {
        Some(c) if c == cls => Ok(formula.clone()),
        Some(c) => Err(Error::Class(format!("formula is declared {c}, solver needs {cls}"))),
        None => partition(formula, cls),
    }
}

/// Solves `formula`, either with the requested algorithm or with the
/// backdoor solver whose class gives the smallest backdoor.
///
/// A requested solver fails with [`Error::Class`] if the formula declares a
/// different base class; undeclared formulas are re-split first. Without a
/// request, a backdoor solver is used when its backdoor is smaller than the
/// prefix, brute force otherwise if the prefix fits under the cap.
pub fn dispatch(formula: &QbfFormula, forced: Option<Algorithm>, cfg: &DispatchConfig) -> Result<Verdict> {
    if let Some(algorithm) = forced {
        return match algorithm.class() {
            None => {
                let (value, stats) = run(formula, algorithm, cfg)?;
                Ok(Verdict {
                    value,
                    algorithm,
                    stats,
                    class: None,
                    k: formula.num_vars(),
                    note: None,
                })
            }
            Some(cls) => {
                let f = prepared(formula, cls)?;
                let (value, stats) = run(&f, algorithm, cfg)?;
                Ok(Verdict {
                    value,
                    algorithm,
                    stats,
                    class: Some(cls),
                    k: f.k(),
                    note: None,
                })
            }
        };
    }

    let best = match formula.base_class.and_then(Algorithm::for_class) {
        Some(a) => Some((a, formula.clone())),
        None => {
            let atoms: Vec<Atom> = formula.matrix.atoms().collect();
            rank_classes(&atoms)
                .into_iter()
                .filter(|r| r.fpt)
                .find_map(|r| partition(formula, r.class).ok())
                .map(|f| {
                    (
                        Algorithm::for_class(f.base_class.expect("set by partition")).expect("fpt"),
                        f,
                    )
                })
        }
    };
    let n = formula.num_vars();
    let mut note = None;
    if let Some((algorithm, f)) = &best {
        let k = f.k();
        if k < n || n > cfg.brute_cap {
            if k >= n {
                note = Some(format!(
                    "no backdoor smaller than the {n} variables; {n} exceeds the brute-force cap {}",
                    cfg.brute_cap
                ));
                if !cfg.fallback {
                    return Err(Error::Cap {
                        size: n,
                        cap: cfg.brute_cap,
                    });
                }
            }
            let (value, stats) = run(f, *algorithm, cfg)?;
            return Ok(Verdict {
                value,
                algorithm: *algorithm,
                stats,
                class: f.base_class,
                k,
                note,
            });
        }
    }
    let (value, stats) = run(formula, Algorithm::BruteForce, cfg)?;
    Ok(Verdict {
        value,
        algorithm: Algorithm::BruteForce,
        stats,
        class: None,
        k: n,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::backdoor_example;
    use crate::formula::{Clause, Equation, Matrix, Prefix, Var};
    use crate::oracle::eval_bruteforce;
    use Quantifier::{Exists as E, Forall as A};

    fn formula(prefix: &[(u32, Quantifier)], phi1: &[&[i64]], phi2: &[&[i64]], cls: Option<BaseClass>) -> QbfFormula {
        let cl = |c: &&[i64]| Clause::from_dimacs(c).unwrap();
        QbfFormula::new(
            Prefix::new(prefix.iter().map(|&(i, q)| (Var::new(i), q))).unwrap(),
            Matrix::new(
                phi1.iter().map(|c| cl(c).into()).collect(),
                phi2.iter().map(cl).collect(),
            ),
            cls,
        )
    }

    const PN: Option<BaseClass> = Some(BaseClass::PosAndNegUnits);

    #[test]
    fn posneg_examples() {
        assert!(
            solve_posneg(&formula(&[(1, A), (2, E)], &[&[1, 2]], &[], PN))
                .unwrap()
                .0
        );
        assert!(!solve_posneg(&formula(&[(1, A)], &[&[-1]], &[], PN)).unwrap().0);
        let f = formula(&[(1, A), (2, E), (3, E)], &[&[1, 2, 3]], &[&[-3]], PN);
        assert!(solve_posneg(&f).unwrap().0);
        assert!(eval_bruteforce(&f).unwrap());
    }

    #[test]
    fn posneg_rejects_out_of_class() {
        let f = formula(&[(1, E), (2, E)], &[&[-1, -2]], &[], None);
        assert!(matches!(solve_posneg(&f), Err(Error::Class(_))));
    }

    #[test]
    fn dual_examples() {
        let f = formula(&[(1, E)], &[&[-1]], &[], Some(BaseClass::NegAndPosUnits));
        assert!(solve_dual_posneg(&f).unwrap().0);
        let f = formula(&[(1, A), (2, E)], &[&[-1, -2]], &[], Some(BaseClass::NegAndPosUnits));
        assert!(solve_dual_posneg(&f).unwrap().0);
    }

    #[test]
    fn dispatch_example() {
        let v = dispatch(&backdoor_example(), None, &DispatchConfig::default()).unwrap();
        assert_eq!(v.algorithm, Algorithm::TwoCnfBackdoor);
        assert!(v.value);
    }

    #[test]
    fn dispatch_pure_xor() {
        let x = Var::new;
        let f = QbfFormula::new(
            Prefix::new([(x(1), A), (x(2), E)]).unwrap(),
            Matrix::new(vec![Equation::new([x(1), x(2)], true).into()], vec![]),
            None,
        );
        let v = dispatch(&f, None, &DispatchConfig::default()).unwrap();
        assert_eq!((v.algorithm, v.k, v.value), (Algorithm::AffBackdoor, 0, true));
    }

    #[test]
    fn dispatch_small_dense_cnf_uses_brute_force() {
        let p: Vec<(u32, Quantifier)> = (1..=6).map(|i| (i, if i % 2 == 0 { A } else { E })).collect();
        let f = formula(
            &p,
            &[&[1, 2, -3], &[-1, 4, 5], &[3, -5, 6], &[-2, -4, -6], &[1, -6, 3]],
            &[],
            None,
        );
        let v = dispatch(&f, None, &DispatchConfig::default()).unwrap();
        assert_eq!(v.algorithm, Algorithm::BruteForce);
        assert_eq!(v.value, eval_bruteforce(&f).unwrap());
    }

    #[test]
    fn forced_solver_must_match_declared_class() {
        let mut f = backdoor_example();
        f.base_class = Some(BaseClass::Horn);
        assert!(matches!(
            dispatch(&f, Some(Algorithm::AffBackdoor), &DispatchConfig::default()),
            Err(Error::Class(_))
        ));
        f.base_class = None;
        let v = dispatch(&f, Some(Algorithm::AffBackdoor), &DispatchConfig::default()).unwrap();
        assert!(v.value);
    }

    #[test]
    fn cap_without_fallback() {
        let n = 30u32;
        let p: Vec<(u32, Quantifier)> = (1..=n).map(|i| (i, E)).collect();
        let wide: Vec<i64> = (1..=n as i64).collect();
        let f = formula(&p, &[&wide, &wide.iter().map(|l| -l).collect::<Vec<_>>()], &[], None);
        let cfg = DispatchConfig {
            brute_cap: 24,
            fallback: false,
        };
        assert_eq!(dispatch(&f, None, &cfg), Err(Error::Cap { size: 30, cap: 24 }));
        let v = dispatch(&f, None, &DispatchConfig::default()).unwrap();
        assert!(v.value && v.note.is_some());
    }
}
