//! Exact toric computations of minimal log discrepancies for cyclic quotient
//! and hyperquotient singularities, with lemma checkers and exclusion screens.

pub mod arith;
pub mod error;
pub mod exclusion;
pub mod lemma;
pub mod mld;
pub mod parallel;
pub mod screen;
pub mod types;

pub use arith::Rational;
pub use error::{Error, Result};
pub use types::{HyperquotientType, MonomialSupport, QuotientType, Weighting};
