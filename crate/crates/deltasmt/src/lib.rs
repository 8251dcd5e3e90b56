//! A delta-complete decision procedure for bounded quantifier-free nonlinear
//! real constraints over polynomials and transcendental functions.
//!
//! The solver combines conflict-driven reasoning over linear rational
//! arithmetic with incremental linearisation of nonlinear constraints.
//! Nonlinear values are computed by exact dyadic interval arithmetic at
//! adaptive precision, so `sat` and `unsat` answers are exact and `delta-sat`
//! answers come with an independently checkable witness of the weakened
//! formula.
//!
//! Pipeline: [`parse`] an input problem, [`transform::normalize_predicates`]
//! and [`transform::to_separated_form`], then [`engine::solve`] under a
//! chosen `delta` and linearisation strategy. The [`oracle`] module holds an
//! independent branch-and-prune decider used for differential testing.

pub mod engine;
pub mod linarith;
pub mod linearise;
pub mod num;
pub mod oracle;
pub mod parse;
pub mod realeval;
pub mod term;
pub mod transform;

pub use engine::{solve, Limits, Outcome, SolveOptions};
pub use linearise::LinMode;
pub use num::{Dyadic, Rational};
pub use parse::{parse, InputScript, ParseError};
pub use term::{Assignment, LinearAtom, LinearClause, NonlinConstraint, Status, Term, VarId};
pub use transform::{bounds_analysis, delta_weaken, normalize_predicates, to_separated_form};
