//! Exact scalars, dense linear algebra, finite graded algebras and the
//! characteristic-class series calculus.

pub mod algebra;
pub mod matrix;
pub mod nilpotent;
pub mod scalar;
pub mod series;

pub use algebra::{add_vec, axpy, scale_vec, sub_vec, AlgebraBuilder, GradedAlgebra, GradedClass};
pub use matrix::{dot, Matrix, SparseVec};
pub use nilpotent::{nilpotent_binomial, InAlgebra, UnitalRing};
pub use scalar::{binomial, factorial, int, parse_rat, rat, Rat, Scalar};
