use std::sync::Arc;

use super::{chern_grade_defect, verify_ck, CKDecomposition, Provenance};
use crate::corresp::{BlockCorrespondence, Correspondence, MotiveSum};
use crate::error::{Error, Result};
use crate::exactalg::Scalar;
use crate::report::Report;
use crate::variety::ProjectiveBundle;

/// Decomposition of `P(E)` with the intermediate block correspondences.
#[derive(Clone, Debug)]
pub struct ProjBundleCk<S> {
    pub ck: CKDecomposition<S>,
    /// `Φ : ⊕_{l=0}^r 𝔥(X)(−l) → 𝔥(P)`.
    pub phi: BlockCorrespondence<S>,
    /// `σ ∘ ᵗΦ ∘ Φ = 1 + η`.
    pub unipotent: BlockCorrespondence<S>,
    pub psi: BlockCorrespondence<S>,
    /// `σ ∘ ᵗΨ`, the inverse of `Ψ`.
    pub psi_inv: BlockCorrespondence<S>,
    pub report: Report,
}

/// `γ₀ = Σ_{i=0}^r π^*c_i(E) · ξ^{r−i}`.
pub fn gamma0<S: Scalar>(pb: &ProjectiveBundle<S>) -> Vec<S> {
    let base = &pb.base.chow;
    let mut parts = vec![vec![S::zero(); base.dim()]; pb.r + 1];
    for i in 0..=pb.r {
        parts[pb.r - i] = base.component(&pb.bundle.chern, i);
    }
    pb.reduce(parts)
}

pub fn ck_projective_bundle<S: Scalar>(ckx: &CKDecomposition<S>, pb: &ProjectiveBundle<S>) -> Result<ProjBundleCk<S>> {
    let x = &pb.base;
    if !Arc::ptr_eq(&ckx.variety, x) {
        return Err(Error::Mismatch("decomposition is not on the base".into()));
    }
    if let Some(f) = verify_ck(ckx).failures().first() {
        return Err(Error::Precondition(format!("base CK fails {}", f.check_id)));
    }
    if let Some(w) = chern_grade_defect(ckx, &pb.bundle.chern) {
        return Err(Error::Precondition(format!("Chern classes of the bundle are not of grade 0: {w}")));
    }
    let p = &pb.variety;
    let r = pb.r;
    let dp = p.dim as i64;

    let tpi = Correspondence::graph(&pb.pi).transpose();
    let h = Correspondence::multiplication(p, &pb.xi);
    let gamma = Correspondence::multiplication(p, &gamma0(pb));
    let mut entries = Vec::with_capacity(r + 1);
    let mut hl = Correspondence::diagonal(p);
    for _l in 0..r {
        entries.push(tpi.then(&hl)?);
        hl = hl.then(&h)?;
    }
    entries.push(tpi.then(&gamma)?);

    let source = MotiveSum::new((0..=r).map(|l| (x.clone(), l as i64)).collect());
    let phi = BlockCorrespondence::row(source.clone(), (p.clone(), 0), entries)?;
    let tphi = phi.transpose(dp);
    let sigma = BlockCorrespondence::matching(&tphi.target, &source)?;
    let unipotent = phi.then(&tphi)?.then(&sigma)?;
    let psi = unipotent.unipotent_power(&neg_half())?.then(&phi)?;
    let psi_inv = psi.transpose(dp).then(&sigma)?;

    let mut report = Report::new();
    report.run("projbundle.left_inverse", || {
        match psi.then(&psi_inv) {
            Ok(c) => (c != BlockCorrespondence::identity(&source)).then(|| "σᵗΨ∘Ψ != id".to_string()),
            Err(e) => Some(e.to_string()),
        }
    });
    report.run("projbundle.right_inverse", || {
        match psi_inv.then(&psi) {
            Ok(c) => match c.single_entry() {
                Ok(e) => (*e != Correspondence::diagonal(p)).then(|| "Ψ∘σᵗΨ != Δ".to_string()),
                Err(e) => Some(e.to_string()),
            },
            Err(e) => Some(e.to_string()),
        }
    });
    if !report.all_pass() {
        return Err(Error::Verification(format!("projective bundle motive isomorphism on {}", p.name)));
    }

    let projectors = (0..=2 * p.dim)
        .map(|i| {
            let diag: Vec<Correspondence<S>> = (0..=r).map(|l| ckx.pi_or_zero(i as i64 - 2 * l as i64)).collect();
            let mid = BlockCorrespondence::diagonal(&source, diag);
            Ok(psi_inv.then(&mid)?.then(&psi)?.single_entry()?.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    let ck = CKDecomposition::new(p.clone(), projectors, Provenance::ProjBundle)?;
    Ok(ProjBundleCk { ck, phi, unipotent, psi, psi_inv, report })
}

/// Exponent `−1/2`.
pub(super) fn neg_half<S: Scalar>() -> S {
    -S::from_ratio(1, 2)
}
