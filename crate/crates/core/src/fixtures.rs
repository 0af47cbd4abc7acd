//! Small reference formulas used by documentation, tests and the command
//! line tools.

use crate::backdoor::BaseClass;
use crate::formula::{Atom, Clause, Matrix, Prefix, QbfFormula, Quantifier, Var};

/// `∃x1 ∀x2 ∃x3 ∃x4 ∃x5` over the 2-CNF part
/// `(x1∨x3)(¬x1∨x4)(x3∨x4)(x2∨x5)` and the backdoor clause `(¬x3∨¬x4∨¬x5)`.
/// The formula is true.
pub const BACKDOOR_EXAMPLE_QDIMACS: &str = "\
c running example: 2-CNF plus one wide clause
p cnf 5 5
e 1 0
a 2 0
e 3 4 5 0
1 3 0
-1 4 0
3 4 0
2 5 0
-3 -4 -5 0
";

pub fn backdoor_example() -> QbfFormula {
    let v = Var::new;
    let prefix = Prefix::new([
        (v(1), Quantifier::Exists),
        (v(2), Quantifier::Forall),
        (v(3), Quantifier::Exists),
        (v(4), Quantifier::Exists),
        (v(5), Quantifier::Exists),
    ])
    .expect("distinct variables");
    let cl = |lits: &[i64]| Clause::from_dimacs(lits).expect("non-tautological");
    let tractable: Vec<Atom> = [&[1, 3][..], &[-1, 4], &[3, 4], &[2, 5]]
        .into_iter()
        .map(|c| cl(c).into())
        .collect();
    QbfFormula::new(
        prefix,
        Matrix::new(tractable, vec![cl(&[-3, -4, -5])]),
        Some(BaseClass::TwoCnf),
    )
}
