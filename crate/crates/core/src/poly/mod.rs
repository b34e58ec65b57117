//! Exact sparse polynomials, parsing, supports and lattice geometry.

mod exponent;
mod lattice;
mod parse;
mod polynomial;
mod set;

pub use exponent::{exponents_of_degree, monomial_basis, Exponent};
pub use lattice::{half_hull_lattice, in_convex_hull, LatticeSet};
pub use parse::{parse_polynomial, validate_names, ParseError};
pub use polynomial::{int, rational, DimensionMismatch, FloatPoly, PolyDisplay, Polynomial, Rational};
pub use set::{SemialgebraicSet, SetError};

pub use polynomial::canonical_names;
