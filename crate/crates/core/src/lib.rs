//! Structural identifiability acceleration by transcendence-basis elimination.
//!
//! The pipeline turns an ODE model into the prolonged polynomial system used by
//! the differential-algebra identifiability test, finds an algebraically
//! independent set of non-identifiable unknowns, ranks candidate sets by their
//! degree-weighted count entropy, substitutes random integers for the chosen
//! set and hands the resulting zero-dimensional system to a Gröbner engine.

pub mod algebra;
pub mod linalg;
pub mod model;
pub mod prolong;
pub mod groebner;
pub mod subst;
pub mod basis;
pub mod entropy;
pub mod mem;
pub mod pipeline;
