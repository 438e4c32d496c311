//! Exact arithmetic: coefficient rings, monomials and sparse polynomials.

pub mod field;
pub mod monomial;
pub mod poly;

pub use field::{is_prime, CoeffRing, Integers, ModulusError, Rationals, Zp, DEFAULT_PRIME};
pub use monomial::{Exp, Monomial, MonomialOrder, OrderError};
pub use poly::{parse_poly, AlgebraError, MultiPoly, Ring};
