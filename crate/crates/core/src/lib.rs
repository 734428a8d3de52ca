//! Certified computations on Carnot groups: Popp scalar products, the
//! truncated BCH group law, adjusted horizontal decompositions, explicit
//! horizontal paths with length certificates, ball-box constants and
//! systolic checks on nilpotent lattices.

pub mod adjust;
pub mod algebra;
pub mod bch;
pub mod certificates;
pub mod error;
pub mod free;
pub mod lattice;
pub mod linalg;
pub mod path;
pub mod popp;
pub mod scalar;

pub use algebra::{builtin_family, load_algebra, Family, GVec, GradedAlgebra};
pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};
