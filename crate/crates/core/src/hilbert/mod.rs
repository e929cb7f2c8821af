//! Hilbert schemes of points on a surface: `X^[2]`, the nested schemes
//! `X^[1,2]` and `X^[2,3]`, and `X^[3]` through the tower
//! `X₀ = X³ ← X₁ ← X₂ ← X₃` and its `𝔖₃`-quotient.

mod action;
mod descent;
mod lemmas;
mod square;
mod tangent;
mod tower;

use crate::ckd::{verify_all, CKDecomposition};
use crate::error::{Error, Result};
use crate::exactalg::Scalar;

pub use action::{s3_action, s3_perms, S3Actions};
pub use descent::{build_descent, build_hilb3, omega_relative_character, omega_relative_chern, Contracted, DescentData, Hilb3};
pub use lemmas::{
    diagonal_correction_l2, diagonal_pullback_l2, diagonal_pullback_l3, solve_small_diagonal_excess, verify_diagonal_lemma, verify_excess_configurations,
    verify_excess_transition, SmallDiagonalExcess,
};
pub(crate) use square::diagonal_morphism;
pub use square::{build_hilb_square, build_nested_12, build_nested_23, HilbSquare, Nested12, Nested23};
pub use tangent::{discrepancy_c1, pulled_tangent_nested, NestedTangent};
pub use tower::{build_tower, Hilb3Tower, PAIRS};

/// The base must carry a verified self-dual multiplicative decomposition
/// with Chern classes of grade 0.
pub(crate) fn check_base<S: Scalar>(ckx: &CKDecomposition<S>) -> Result<()> {
    let rep = verify_all(ckx);
    match rep.failures().first() {
        Some(f) => Err(Error::Precondition(format!("base {}: {}", f.check_id, f.witness.clone().unwrap_or_default()))),
        None => Ok(()),
    }
}

pub(crate) fn first_failure(rep: &crate::report::Report, stage: &str) -> Result<()> {
    match rep.failures().first() {
        Some(f) => Err(Error::Verification(format!("{stage}: {} ({})", f.check_id, f.witness.clone().unwrap_or_default()))),
        None => Ok(()),
    }
}
