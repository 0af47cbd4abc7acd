//! Base-class membership and clause-covering backdoor detection.
//!
//! Detection is syntactic: every atom outside the class goes to the
//! backdoor and the backdoor set is the union of those atoms' variables.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::formula::{Atom, Clause, Matrix, QbfFormula, Var};

/// Equations wider than this cannot be moved into a clausal backdoor.
pub const MAX_EXPANDED_EQUATION: usize = 16;

/// Tractable classes the matrix can be split against. `d` is at least 2
/// where present.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum BaseClass {
    /// At most two literals per clause.
    TwoCnf,
    /// At most one positive literal per clause.
    Horn,
    /// At most one negative literal per clause.
    DualHorn,
    /// Horn clauses with at most `d` literals.
    DHorn(u32),
    /// Parity equations.
    Aff,
    /// Negative clauses, units and implications.
    IhsbMinus,
    /// Positive clauses, units and implications.
    IhsbPlus,
    /// [`BaseClass::IhsbMinus`] with negative clauses capped at `d` literals.
    DIhsbMinus(u32),
    /// [`BaseClass::IhsbPlus`] with positive clauses capped at `d` literals.
    DIhsbPlus(u32),
    /// Positive clauses of any width and negative units.
    PosAndNegUnits,
    /// Negative clauses of any width and positive units; the dual of
    /// [`BaseClass::PosAndNegUnits`].
    NegAndPosUnits,
}

impl BaseClass {
    /// Whether a backdoor solver exists for this class.
    pub fn has_fpt_solver(self) -> bool {
        matches!(
            self,
            BaseClass::TwoCnf | BaseClass::Aff | BaseClass::PosAndNegUnits | BaseClass::NegAndPosUnits
        )
    }

    /// The class obtained by flipping every literal.
    pub fn dual(self) -> Option<BaseClass> {
        Some(match self {
            BaseClass::TwoCnf => BaseClass::TwoCnf,
            BaseClass::Aff => BaseClass::Aff,
            BaseClass::Horn => BaseClass::DualHorn,
            BaseClass::DualHorn => BaseClass::Horn,
            BaseClass::IhsbMinus => BaseClass::IhsbPlus,
            BaseClass::IhsbPlus => BaseClass::IhsbMinus,
            BaseClass::DIhsbMinus(d) => BaseClass::DIhsbPlus(d),
            BaseClass::DIhsbPlus(d) => BaseClass::DIhsbMinus(d),
            BaseClass::PosAndNegUnits => BaseClass::NegAndPosUnits,
            BaseClass::NegAndPosUnits => BaseClass::PosAndNegUnits,
            BaseClass::DHorn(_) => return None,
        })
    }

    fn is_clausal(self) -> bool {
        self != BaseClass::Aff
    }
}

impl fmt::Display for BaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseClass::TwoCnf => f.write_str("2cnf"),
            BaseClass::Horn => f.write_str("horn"),
            BaseClass::DualHorn => f.write_str("dualhorn"),
            BaseClass::DHorn(d) => write!(f, "horn:{d}"),
            BaseClass::Aff => f.write_str("aff"),
            BaseClass::IhsbMinus => f.write_str("ihsb-"),
            BaseClass::IhsbPlus => f.write_str("ihsb+"),
            BaseClass::DIhsbMinus(d) => write!(f, "ihsb-:{d}"),
            BaseClass::DIhsbPlus(d) => write!(f, "ihsb+:{d}"),
            BaseClass::PosAndNegUnits => f.write_str("posneg"),
            BaseClass::NegAndPosUnits => f.write_str("negpos"),
        }
    }
}

impl FromStr for BaseClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<BaseClass> {
        let tag = s.trim().to_ascii_lowercase();
        let (head, width) = match tag.split_once(':') {
            Some((h, d)) => {
                let d: u32 = d.parse().map_err(|_| Error::UnknownTag(s.to_string()))?;
                if d < 2 {
                    return Err(Error::UnknownTag(s.to_string()));
                }
                (h, Some(d))
            }
            None => (tag.as_str(), None),
        };
        Ok(match (head, width) {
            ("2cnf", None) => BaseClass::TwoCnf,
            ("horn", None) => BaseClass::Horn,
            ("horn", Some(d)) => BaseClass::DHorn(d),
            ("dualhorn", None) => BaseClass::DualHorn,
            ("aff", None) => BaseClass::Aff,
            ("ihsb-", None) => BaseClass::IhsbMinus,
            ("ihsb+", None) => BaseClass::IhsbPlus,
            ("ihsb-", Some(d)) => BaseClass::DIhsbMinus(d),
            ("ihsb+", Some(d)) => BaseClass::DIhsbPlus(d),
            ("posneg", None) => BaseClass::PosAndNegUnits,
            ("negpos", None) => BaseClass::NegAndPosUnits,
            _ => return Err(Error::UnknownTag(s.to_string())),
        })
    }
}

fn is_implication(c: &Clause) -> bool {
    c.len() == 2 && c.positive_count() == 1
}

/// Syntactic membership test. Equations belong only to
/// [`BaseClass::Aff`]; the empty clause belongs to every clausal class.
pub fn clause_in_class(c: &Clause, cls: BaseClass) -> bool {
    let (pos, neg, len) = (c.positive_count(), c.negative_count(), c.len());
    let small = |d: u32| len <= d as usize;
    match cls {
        BaseClass::TwoCnf => len <= 2,
        BaseClass::Horn => pos <= 1,
        BaseClass::DualHorn => neg <= 1,
        BaseClass::DHorn(d) => pos <= 1 && small(d),
        BaseClass::Aff => false,
        BaseClass::IhsbMinus => pos == 0 || len == 1 || is_implication(c),
        BaseClass::IhsbPlus => neg == 0 || len == 1 || is_implication(c),
        BaseClass::DIhsbMinus(d) => (pos == 0 && small(d)) || len == 1 || is_implication(c),
        BaseClass::DIhsbPlus(d) => (neg == 0 && small(d)) || len == 1 || is_implication(c),
        BaseClass::PosAndNegUnits => neg == 0 || (len == 1 && neg == 1),
        BaseClass::NegAndPosUnits => pos == 0 || (len == 1 && pos == 1),
    }
}

pub fn atom_in_class(atom: &Atom, cls: BaseClass) -> bool {
    match atom {
        Atom::Clause(c) => clause_in_class(c, cls),
        Atom::Equation(_) => cls == BaseClass::Aff,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Detection {
    /// Variables of the out-of-class atoms.
    pub backdoor_vars: BTreeSet<Var>,
    /// Positions of the out-of-class atoms in the input sequence.
    pub out_indices: BTreeSet<usize>,
}

impl Detection {
    pub fn k(&self) -> usize {
        self.backdoor_vars.len()
    }
}

/// Collects the atoms outside `cls` and the variables covering them.
///
/// Fails with [`Error::Class`] when an out-of-class equation is too wide to
/// be rewritten as backdoor clauses.
pub fn detect_cc_backdoor(atoms: &[Atom], cls: BaseClass) -> Result<Detection> {
    let mut det = Detection::default();
    for (i, a) in atoms.iter().enumerate() {
        if atom_in_class(a, cls) {
            continue;
        }
        if let Atom::Equation(e) = a {
            if e.vars().len() > MAX_EXPANDED_EQUATION {
                return Err(Error::Class(format!(
                    "equation on {} variables cannot join a clausal backdoor for {cls}",
                    e.vars().len()
                )));
            }
        }
        det.out_indices.insert(i);
        det.backdoor_vars.extend(a.vars());
    }
    Ok(det)
}

/// Re-splits the whole matrix of `formula` against `cls`. Out-of-class
/// equations are expanded into their clausal encoding.
pub fn partition(formula: &QbfFormula, cls: BaseClass) -> Result<QbfFormula> {
    let atoms: Vec<Atom> = formula.matrix.atoms().collect();
    let det = detect_cc_backdoor(&atoms, cls)?;
    let mut tractable = Vec::new();
    let mut backdoor = Vec::new();
    for (i, a) in atoms.into_iter().enumerate() {
        if det.out_indices.contains(&i) {
            backdoor.extend(a.to_clauses());
        } else {
            tractable.push(a);
        }
    }
    debug_assert!(cls.is_clausal() || tractable.iter().all(|a| a.as_equation().is_some()));
    Ok(QbfFormula::new(
        formula.prefix.clone(),
        Matrix::new(tractable, backdoor),
        Some(cls),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ranked {
    pub class: BaseClass,
    pub k: usize,
    pub fpt: bool,
}

/// Classes considered by [`rank_classes`], in tie-breaking order.
pub const RANKED_CLASSES: [BaseClass; 6] = [
    BaseClass::TwoCnf,
    BaseClass::Aff,
    BaseClass::PosAndNegUnits,
    BaseClass::NegAndPosUnits,
    BaseClass::Horn,
    BaseClass::DualHorn,
];

/// Backdoor size for each candidate class, smallest first. Classes whose
/// detection fails are left out.
pub fn rank_classes(atoms: &[Atom]) -> Vec<Ranked> {
    let mut out: Vec<Ranked> = RANKED_CLASSES
        .iter()
        .filter_map(|&class| {
            detect_cc_backdoor(atoms, class).ok().map(|d| Ranked {
                class,
                k: d.k(),
                fpt: class.has_fpt_solver(),
            })
        })
        .collect();
    out.sort_by_key(|r| r.k);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::backdoor_example;
    use crate::formula::Equation;

    fn cl(lits: &[i64]) -> Clause {
        Clause::from_dimacs(lits).unwrap()
    }

    fn atoms(cs: &[&[i64]]) -> Vec<Atom> {
        cs.iter().map(|c| cl(c).into()).collect()
    }

    #[test]
    fn membership() {
        let wide_neg = cl(&[-3, -4, -5]);
        assert!(clause_in_class(&wide_neg, BaseClass::Horn));
        assert!(!clause_in_class(&wide_neg, BaseClass::TwoCnf));
        assert!(clause_in_class(&cl(&[-1, 2]), BaseClass::IhsbMinus));
        assert!(!clause_in_class(&cl(&[1, 2, -3]), BaseClass::IhsbPlus));
        assert!(clause_in_class(&cl(&[1]), BaseClass::IhsbMinus));
        assert!(clause_in_class(&cl(&[-1]), BaseClass::IhsbPlus));
        assert!(!clause_in_class(&cl(&[-1, -2, -3]), BaseClass::DIhsbMinus(2)));
        assert!(clause_in_class(&cl(&[-1, -2]), BaseClass::DIhsbMinus(2)));
        assert!(clause_in_class(&cl(&[1, 2, 3, 4]), BaseClass::PosAndNegUnits));
        assert!(!clause_in_class(&cl(&[-1, -2]), BaseClass::PosAndNegUnits));
        assert!(clause_in_class(&Clause::empty(), BaseClass::DHorn(3)));
        assert!(!atom_in_class(&cl(&[1]).into(), BaseClass::Aff));
        assert!(atom_in_class(
            &Equation::new([Var::new(1)], true).into(),
            BaseClass::Aff
        ));
    }

    #[test]
    fn example_detects_three() {
        let f = backdoor_example();
        let all: Vec<Atom> = f.matrix.atoms().collect();
        let d = detect_cc_backdoor(&all, BaseClass::TwoCnf).unwrap();
        assert_eq!(d.out_indices, BTreeSet::from([4]));
        assert_eq!(d.backdoor_vars, [3, 4, 5].map(Var::new).into_iter().collect());
        let ranks = rank_classes(&all);
        assert!(ranks.contains(&Ranked {
            class: BaseClass::TwoCnf,
            k: 3,
            fpt: true
        }));
    }

    #[test]
    fn in_class_matrix_has_empty_backdoor() {
        let d = detect_cc_backdoor(&atoms(&[&[1, 2], &[-2]]), BaseClass::TwoCnf).unwrap();
        assert_eq!(d, Detection::default());
    }

    #[test]
    fn clauses_against_aff_are_all_out() {
        let a = atoms(&[&[1, 2], &[-3]]);
        let d = detect_cc_backdoor(&a, BaseClass::Aff).unwrap();
        assert_eq!(d.out_indices.len(), 2);
        assert_eq!(d.k(), 3);
    }

    #[test]
    fn pure_xor_ranks_aff_first() {
        let v = Var::new;
        let a: Vec<Atom> = vec![
            Equation::new([v(1), v(2)], true).into(),
            Equation::new([v(2), v(3), v(4)], false).into(),
        ];
        let r = rank_classes(&a);
        assert_eq!(
            r[0],
            Ranked {
                class: BaseClass::Aff,
                k: 0,
                fpt: true
            }
        );
    }

    #[test]
    fn negative_clauses_ranking() {
        let a = atoms(&[&[-1, -2, -3], &[-2, -4], &[-5, -1]]);
        let r = rank_classes(&a);
        let k_of = |c| r.iter().find(|x| x.class == c).unwrap().k;
        assert_eq!(k_of(BaseClass::Horn), 0);
        assert_eq!(k_of(BaseClass::NegAndPosUnits), 0);
        assert_eq!(k_of(BaseClass::PosAndNegUnits), 5);
        assert_eq!(k_of(BaseClass::TwoCnf), 3);
        assert!(r.windows(2).all(|w| w[0].k <= w[1].k));
    }

    #[test]
    fn partition_expands_out_of_class_equations() {
        let v = Var::new;
        let f = QbfFormula::new(
            crate::formula::Prefix::new([(v(1), crate::Quantifier::Exists), (v(2), crate::Quantifier::Exists)])
                .unwrap(),
            Matrix::new(vec![Equation::new([v(1), v(2)], true).into()], vec![]),
            None,
        );
        let g = partition(&f, BaseClass::TwoCnf).unwrap();
        assert!(g.matrix.tractable.is_empty());
        let mut got = g.matrix.backdoor.clone();
        got.sort();
        let mut want = vec![cl(&[-1, -2]), cl(&[1, 2])];
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn tags_round_trip() {
        for tag in [
            "2cnf", "horn", "dualhorn", "horn:3", "aff", "ihsb-", "ihsb+", "ihsb-:4", "ihsb+:2", "posneg", "negpos",
        ] {
            assert_eq!(tag.parse::<BaseClass>().unwrap().to_string(), tag);
        }
        assert!("horn:1".parse::<BaseClass>().is_err());
        assert!("cnf".parse::<BaseClass>().is_err());
    }
}
