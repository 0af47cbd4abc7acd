//! Solvers for quantified Boolean formulas that are close to a tractable
//! class.
//!
//! A formula's matrix is split into a *tractable* part, which lies in a base
//! class such as 2-CNF or affine equations, and a *backdoor* part of
//! arbitrary clauses. The algorithms here run in time exponential only in
//! the number `k` of variables touched by the backdoor clauses.
//!
//! ```
//! use qbd_core::{fixtures, special};
//!
//! let verdict = special::dispatch(&fixtures::backdoor_example(), None, &Default::default()).unwrap();
//! assert!(verdict.value);
//! assert_eq!(verdict.k, 3);
//! ```

pub mod affine;
pub mod algebra;
pub mod backdoor;
pub mod branch;
pub mod error;
pub mod fixtures;
pub mod formula;
pub mod io;
pub mod oracle;
pub mod reductions;
pub mod special;
pub mod stats;
pub mod twocnf;

pub use backdoor::BaseClass;
pub use error::{Error, ParseError, Result};
pub use formula::{
    apply_assignment, eval_matrix, validate, Assignment, Atom, Clause, Equation, Lit, Matrix, Prefix, QbfFormula,
    Quantifier, Var,
};
pub use stats::SolveStats;
