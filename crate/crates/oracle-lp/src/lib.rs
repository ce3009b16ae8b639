//! Trial-and-error linear programming: solving strict-feasibility systems
//! Ax > b when the constraints are hidden behind a verification oracle that
//! only reports the index of one violated constraint per query.
//!
//! The crate provides exact rational geometry primitives, simplex-based LP
//! decision procedures, simulated oracles, two complete solvers (one for the
//! worst-case oracle, one for the furthest-violation oracle), chamber
//! counting experiments, and adversarial lower-bound instance families.

pub mod chambers;
pub mod covering;
pub mod furthest;
pub mod geom;
pub mod instance;
pub mod lowerbound;
pub mod lp;
pub mod oracle;
pub mod rat;
pub mod report;
pub mod vecn;
