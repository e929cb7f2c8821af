use std::sync::Arc;

use super::builders::build_projective_bundle;
use super::{BundleData, Morphism, Recipe, VarRef};
use crate::error::{Error, Result};
use crate::exactalg::Scalar;

/// Pull a tower of projective bundles over `X` back along `f: B → X`.
///
/// Returns `V ×_X B` together with its projection to `V`.
pub fn replay_over_base<S: Scalar>(v: &VarRef<S>, f: &Morphism<S>) -> Result<(VarRef<S>, Morphism<S>)> {
    if Arc::ptr_eq(v, &f.target) {
        return Ok((f.source.clone(), f.clone()));
    }
    match &v.recipe {
        Recipe::ProjectiveBundle { base, rank, chern } => {
            let (new_base, g) = replay_over_base(base, f)?;
            let bundle = BundleData::new(new_base.clone(), *rank, g.pull(chern))?;
            let pb = build_projective_bundle(&bundle)?;
            // Same layout on both sides: ξ^a π^*β ↦ ξ′^a π′^* g^*β.
            let old = build_projective_bundle(&BundleData::new(base.clone(), *rank, chern.clone())?)?;
            let m = old.ring_map(&pb.variety.chow, &pb.pi.pullback.mul(&g.pullback), &pb.xi);
            let proj = Morphism::new(format!("{}x{}", v.name, f.source.name), pb.variety.clone(), v.clone(), m)?;
            Ok((pb.variety, proj))
        }
        _ => Err(Error::NotBaseRelative(format!("{} ({}) is not a projective-bundle tower over {}", v.name, v.recipe.kind(), f.target.name))),
    }
}
