//! Invariant generation for multi-path loops with affine and multiplicative
//! updates, over exact rational arithmetic.
//!
//! The pipeline, end to end:
//!
//! ```text
//! source text
//!   -> parse          (single while loop, branches, assignments)
//!   -> flatten        (cartesian product of branches = list of straight-line paths)
//!   -> extract        (one recurrence system per path, by forward substitution)
//!   -> solve          (closed forms as exponential polynomials in the loop counter)
//!   -> invariants     (eliminate counters/exponentials per path, then intersect
//!                      path ideals to a fixed point)
//! ```
//!
//! The result is a reduced Groebner basis generating every polynomial equality
//! `p(initial values, current values) = 0` that holds after any number of loop
//! iterations along any interleaving of the paths.

pub mod error;
pub mod expoly;
pub mod frontend;
pub mod groebner;
pub mod invariants;
pub mod pipeline;
pub mod poly;
pub mod rat;
pub mod recurrence;
pub mod roots;
pub mod solver;
pub mod verify;

pub use error::{Diagnostic, DiagnosticCode};
pub use groebner::{buchberger, eliminate, ideal_equal, intersect, normal_form, Ideal};
pub use pipeline::{run, AnalysisReport, RunOptions};
pub use poly::{Monomial, MonomialOrder, MultiPoly, Universe, VarId, VarKind};
pub use rat::Rat;
pub use verify::{verify_numeric, VerifyOptions, VerifyOutcome};
